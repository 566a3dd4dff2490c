/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/svg.hpp"

#include "pfc/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace pfc::io {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 220.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kGap = 40.0;
constexpr std::size_t kMaxPoints = 2000;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double x, int digits = 1)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

std::string tick(double x)
{
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

} // namespace

std::string render_svg(const std::string& title, const std::vector<SvgPanel>& panels)
{
    const double height = kTop + panels.size() * (kPanelHeight + kGap) + 20.0;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << height << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";

    const double pw = kWidth - kLeft - kRight;
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const double y0 = kTop + p * (kPanelHeight + kGap);
        double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
        for (const auto& s : panel.series) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) {
                    continue;
                }
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
        if (!std::isfinite(xmin)) {
            xmin = 0.0;
            xmax = 1.0;
            ymin = -1.0;
            ymax = 1.0;
        }
        if (xmax <= xmin) {
            xmax = xmin + 1.0;
        }
        if (ymax - ymin < 1e-9 * std::max(1.0, std::abs(ymax))) {
            ymin -= 1.0;
            ymax += 1.0;
        }
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
        auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
        auto sy = [&](double y) { return y0 + kPanelHeight - (y - ymin) / (ymax - ymin) * kPanelHeight; };

        os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
        os << "<rect x=\"" << kLeft << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\""
           << kPanelHeight << "\" fill=\"none\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << kLeft << "\" y=\"" << y0 - 6 << "\" font-size=\"13\">"
           << escape(panel.title) << "</text>\n";
        os << "<text transform=\"translate(18," << y0 + kPanelHeight / 2
           << ") rotate(-90)\" text-anchor=\"middle\">" << escape(panel.y_label) << "</text>\n";
        for (int t = 0; t <= 4; ++t) {
            const double yv = ymin + (ymax - ymin) * t / 4.0;
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << fixed(sy(yv))
               << "\" y2=\"" << fixed(sy(yv)) << "\" stroke=\"#ddd\"/>\n";
            os << "<text x=\"" << kLeft - 4 << "\" y=\"" << fixed(sy(yv) + 4)
               << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
            os << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << y0 + kPanelHeight + 14
               << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
        }
        for (std::size_t si = 0; si < panel.series.size(); ++si) {
            const auto& s = panel.series[si];
            const char* color = kColors[si % std::size(kColors)];
            const std::size_t stride = std::max<std::size_t>(1, s.x.size() / kMaxPoints);
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); i += stride) {
                if (std::isfinite(s.y[i])) {
                    os << fixed(sx(s.x[i]), 2) << ',' << fixed(sy(s.y[i]), 2) << ' ';
                }
            }
            os << "\"/>\n";
            const double ly = y0 + 14 + 16 * si;
            os << "<line x1=\"" << kLeft + pw + 10 << "\" x2=\"" << kLeft + pw + 30 << "\" y1=\""
               << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
            os << "<text x=\"" << kLeft + pw + 34 << "\" y=\"" << ly << "\">" << escape(s.label)
               << "</text>\n";
        }
        os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << y0 + kPanelHeight + 28
           << "\" text-anchor=\"middle\">t (s)</text>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> write_svg_plots(const std::filesystem::path& dir,
                                                   const std::string& title,
                                                   std::span<const TimeSeriesRecord> records)
{
    std::vector<double> t;
    for (const auto& r : records) {
        t.push_back(r.t);
    }
    auto series = [&](const std::string& label,
                      const std::function<double(const TimeSeriesRecord&)>& f) {
        SvgSeries s{label, t, {}};
        for (const auto& r : records) {
            s.y.push_back(f(r));
        }
        return s;
    };
    auto per_phase = [&](const std::string& name, PhaseArray TimeSeriesRecord::*m) {
        std::vector<SvgSeries> out;
        static const char* const ph[] = {"a", "b", "c"};
        for (std::size_t k = 0; k < 3; ++k) {
            out.push_back(series(name + " " + ph[k], [m, k](const TimeSeriesRecord& r) { return (r.*m)[k]; }));
        }
        return out;
    };
    auto total = [&](const std::string& label, PhaseArray TimeSeriesRecord::*m) {
        return series(label, [m](const TimeSeriesRecord& r) { return (r.*m)[0] + (r.*m)[1] + (r.*m)[2]; });
    };

    std::vector<std::pair<std::string, std::vector<SvgPanel>>> groups;
    groups.push_back({"voltages",
                      {{"Feeder 1 voltage", "V", per_phase("v1", &TimeSeriesRecord::v1)},
                       {"Feeder 2 / load voltage", "V", per_phase("v2", &TimeSeriesRecord::v2)},
                       {"Series injection voltage", "V", per_phase("vs", &TimeSeriesRecord::vs)}}});
    groups.push_back({"currents",
                      {{"Line current", "A", per_phase("i", &TimeSeriesRecord::i)},
                       {"Line current (rms, one cycle)", "A", per_phase("i_rms", &TimeSeriesRecord::i_rms)}}});
    groups.push_back({"pq",
                      {{"Active power (all phases)", "W",
                        {total("P feeder 1", &TimeSeriesRecord::p1), total("P feeder 2 / load", &TimeSeriesRecord::p2),
                         total("P series", &TimeSeriesRecord::ps)}},
                       {"Reactive power (all phases)", "var",
                        {total("Q feeder 1", &TimeSeriesRecord::q1), total("Q feeder 2 / load", &TimeSeriesRecord::q2),
                         total("Q series", &TimeSeriesRecord::qs)}}}});
    groups.push_back({"dclinks",
                      {{"Series dc links", "V", per_phase("Vdc", &TimeSeriesRecord::dc)},
                       {"AFE bus", "V",
                        {series("bus", [](const TimeSeriesRecord& r) { return r.bus; })}},
                       {"MAB phase shifts", "rad", per_phase("phi", &TimeSeriesRecord::mab_phase)}}});

    std::vector<std::filesystem::path> written;
    for (const auto& [name, panels] : groups) {
        const auto path = dir / (name + ".svg");
        std::ofstream out(path, std::ios::binary);
        out << render_svg(title + ": " + name, panels);
        written.push_back(path);
    }
    return written;
}

} // namespace pfc::io

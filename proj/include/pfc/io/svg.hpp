/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Self-contained SVG line plots, one file per figure group.

#include "pfc/sim_engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pfc::io {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgPanel {
    std::string title;
    std::string y_label;
    std::vector<SvgSeries> series;
};

/// Stacked panels sharing the time axis.
std::string render_svg(const std::string& title, const std::vector<SvgPanel>& panels);

/// Writes voltages.svg, currents.svg, pq.svg and dclinks.svg into `dir`.
std::vector<std::filesystem::path> write_svg_plots(const std::filesystem::path& dir,
                                                   const std::string& title,
                                                   std::span<const TimeSeriesRecord> records);

} // namespace pfc::io

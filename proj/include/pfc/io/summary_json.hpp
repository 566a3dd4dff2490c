/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "pfc/io/scenario_file.hpp"
#include "pfc/sim_engine.hpp"

namespace pfc::io {

inline constexpr int kSummarySchema = 1;

/// Summary document (validated by schemas/summary.schema.json): segment
/// metrics with phasor cross-checks, operating-region verdicts, energy audit,
/// warnings and the fault record.
Json summary_to_json(const Scenario& s, const SimResult& result);

} // namespace pfc::io

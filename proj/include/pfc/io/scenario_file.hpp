/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// JSON scenario, magnetics and device files. Every parameter block carries a
// "provenance" tag; unknown keys and missing required keys raise ConfigError
// with the JSON path of the problem.

#include "pfc/loss_bandwidth.hpp"
#include "pfc/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pfc::io {

using Json = nlohmann::ordered_json;

/// A file may start from a preset with "base": "case2" and override blocks.
Scenario scenario_from_json(const Json& doc);
Json scenario_to_json(const Scenario& s);

/// Parses a file. Throws ConfigError("", "no such file: ...") when missing.
Json read_json_file(const std::filesystem::path& path);

/// Preset name or path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

MabMagnetics magnetics_from_json(const Json& doc, const std::string& path = "");
Json magnetics_to_json(const MabMagnetics& m);

StageDevices devices_from_json(const Json& doc);
Json devices_to_json(const StageDevices& d);

} // namespace pfc::io

// SPDX-License-Identifier: Apache-2.0
//
// ulsense - uplink sensing simulator for mmWave hybrid arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ulsense/types.hpp"

namespace ulsense {

/// A beam design together with its hybrid energy factor.
struct BeamChoice
{
    BeamDesign design = BeamDesign::nullspace;
    double rho = 0.5;

    /// "bartlett", "ns", "hybrid:RHO", "sinr" or "mvdr".
    std::string label() const;
    /// Label with characters that are awkward in file names replaced.
    std::string file_tag() const;
    static BeamChoice parse(const std::string &text);

    bool operator==(const BeamChoice &) const = default;
};

struct ExperimentSpec
{
    ScenarioConfig scenario;
    std::vector<double> snr_sweep_db{18.0};
    int trials = 100;
    std::vector<BeamChoice> beams{BeamChoice{}};
    bool run_dde = true; // false: AES and beam gains only
    std::string preset;
    std::filesystem::path output_dir = "results";

    void validate() const;
    bool operator==(const ExperimentSpec &) const;
};

/// Names accepted by apply_preset.
std::vector<std::string> preset_names();

/// Overwrites the sweep, trial count and beam list with a named preset.
void apply_preset(ExperimentSpec &spec, const std::string &name);

/// Parses flat key=value text. Lines starting with '#' and blank lines are
/// ignored. A `preset` key is applied first, explicit keys override it.
ExperimentSpec parse_config(const std::string &text);
ExperimentSpec load_config(const std::filesystem::path &path);

/// Inverse of parse_config (every key written, shortest round-trip numbers).
std::string serialize_config(const ExperimentSpec &spec);

std::string format_double(double v);
std::vector<double> parse_double_list(const std::string &text, const std::string &key);

} // namespace ulsense

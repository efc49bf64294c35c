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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ulsense/aoa.hpp"
#include "ulsense/beams.hpp"
#include "ulsense/config.hpp"
#include "ulsense/ddest.hpp"
#include "ulsense/scenario.hpp"

namespace ulsense {

/// How the C-frame outputs are turned into DD measurements.
enum class RatioMode
{
    ratio,      // y_s / y_c
    symbol_only // y_s / x, offsets left in place (negative control)
};

/// Noise, symbol and clock streams of one trial.
struct TrialStreams
{
    std::uint64_t scenario_seed;
    std::uint64_t clock_seed;
    std::uint64_t aes_seed;
    std::uint64_t dde_seed;

    static TrialStreams from(std::uint64_t trial_seed);
};

/// Raw AES scan outputs for P S-frames (pilots all ones).
AesRawOutputs simulate_aes(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
                           double noise_sigma, Rng &rng);

/// C-frame outputs of one DD-snapshot with reference beam w_c; frame b uses
/// codebook beam b on the second port and clock frame P + b.
CFrameOutputs simulate_cframes(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
                               const CVec &w_c, double noise_sigma, Rng &rng, RatioMode mode = RatioMode::ratio);

/// All five designs computed from one AES pass.
struct BeamSet
{
    BeamVector bartlett, hybrid, nullspace, sinr, mvdr;
    CMat virtual_snapshots; // r_k = W_s s_{0,k} at the design subcarrier (one column)
    CMat gain_moment;       // L x L, LoS first
    double noise_power = 0.0;

    const BeamVector &get(BeamDesign d) const;
};

/// Designs every beam from the AES snapshots and the LoS-first angle list.
BeamSet design_beams(const ScenarioConfig &cfg, const AesSnapshotSet &s, const std::vector<double> &angles);

struct DesignOutcome
{
    BeamChoice beam;
    bool ok = false;
    std::string failure;
    DdEstimate estimate;
    double dde_ms = 0.0;
};

struct TrialResult
{
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    int trial = 0;
    PathSet truth;

    bool aes_ok = false;
    std::string failure;
    AoaEstimate aoa; // valid when aes_ok
    double aes_ms = 0.0;

    /// |w^H a(theta_0)|^2 towards the true LoS angle, by BeamDesign order
    /// (hybrid at cfg.hybrid_rho); NaN when AES failed.
    std::array<double, 5> los_gain{};

    std::vector<DesignOutcome> dde;
};

struct TrialOptions
{
    std::vector<BeamChoice> beams{BeamChoice{}};
    bool run_dde = true;
    RatioMode ratio_mode = RatioMode::ratio;
};

/// One Monte Carlo trial: scenario, AES, beam design, DDE per requested
/// beam. Never throws on estimation failure; the result records it.
TrialResult run_trial(const ScenarioConfig &cfg, std::uint64_t seed, const TrialOptions &opt);

DdSearchOptions search_options(const ScenarioConfig &cfg);

/// A DD-snapshot built with the true angles (no AES stage): scenario and
/// clock from the trial streams of `seed`, reference beam `design` designed
/// from the exact LoS steering vector.
struct DdSnapshotSample
{
    PathSet truth;
    std::optional<RatioSnapshot> snapshot;
};
DdSnapshotSample simulate_dd_snapshot(const ScenarioConfig &cfg, std::uint64_t seed,
                                      BeamDesign design = BeamDesign::nullspace, RatioMode mode = RatioMode::ratio);

} // namespace ulsense

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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ulsense/config.hpp"
#include "ulsense/pipeline.hpp"

namespace ulsense {

/// One row of records_<design>.csv. NaN fields are written as NA.
struct RecordRow
{
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    int trial = 0;
    int path_idx = 0;
    double true_aoa_deg = 0.0;
    double true_doppler_hz = 0.0;
    double true_delay_s = 0.0; // relative to the LoS path
    double est_aoa_deg = 0.0;
    double est_doppler_hz = 0.0;
    double est_delay_s = 0.0;
    bool matched = false;
    double aes_ms = 0.0;
    double dde_ms = 0.0;
};

/// One row of gains_trials.csv.
struct GainRow
{
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    int trial = 0;
    std::string beam_design;
    double los_gain = 0.0; // linear |w^H a(theta_0)|^2
};

inline constexpr const char *kRecordHeader =
    "seed,snr_db,trial,path_idx,true_aoa_deg,true_doppler_hz,true_delay_s,est_aoa_deg,est_doppler_hz,est_delay_s,"
    "matched,aes_ms,dde_ms";
inline constexpr const char *kGainHeader = "seed,snr_db,trial,beam_design,los_gain";

/// Rows of one trial for one beam design (outcome may be null when DDE was
/// not run). AES angles are paired to the true paths by minimum total AoA
/// error; Doppler and delay are read from the DDE triple of the paired angle.
std::vector<RecordRow> record_rows(const TrialResult &trial, const DesignOutcome *outcome, bool timings);
std::vector<GainRow> gain_rows(const TrialResult &trial, double hybrid_rho);

std::string format_record(const RecordRow &row);
RecordRow parse_record(const std::string &line);
std::string format_gain(const GainRow &row);
GainRow parse_gain(const std::string &line);

std::uint64_t fnv1a64(const std::string &bytes);
/// Checksum line closing a trial block.
std::string block_checksum_line(const std::string &block_bytes);

struct RunOptions
{
    int workers = 1;
    bool timings = false;
    bool resume = false;
    bool quiet = true;
};

struct RunSummary
{
    int trials_total = 0;
    int trials_resumed = 0;
    int failed_trials = 0;
    std::vector<std::filesystem::path> files;
};

/// Runs every (snr, trial) job, writes records_<design>.csv, gains_trials.csv
/// and the curve files into spec.output_dir. Output bytes depend only on the
/// spec (and timings flag), never on the worker count.
RunSummary run_experiment(const ExperimentSpec &spec, const RunOptions &opt);

/// Writes nmse.csv, ccdf.csv, accuracy.csv and gain.csv.
void emit_curves(const std::map<std::string, std::vector<RecordRow>> &records, const std::vector<GainRow> &gains,
                 const ExperimentSpec &spec, const std::filesystem::path &dir);

} // namespace ulsense

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

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ulsense {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// e^{j 2 pi x}, with the integer part of x removed first so large phase
// arguments (tau * f0 is ~1e3 cycles) keep full fractional precision.
inline cplx cis_cycles(double x)
{
    const double frac = x - std::floor(x);
    return std::polar(1.0, 2.0 * kPi * frac);
}

/// Raised for violated preconditions of a library call (bad dimensions,
/// non-unit beams, rank-deficient inputs).
class ContractError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for invalid or infeasible experiment configuration. `key` names
/// the offending configuration field when one applies.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string key, const std::string &what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string &key() const noexcept { return key_; }

private:
    std::string key_;
};

/// One propagation path. Doppler is exactly zero for static paths.
struct PathParams
{
    double aoa = 0.0;     // rad, (-pi/2, pi/2)
    double delay = 0.0;   // s
    double doppler = 0.0; // Hz
    cplx gain{1.0, 0.0};
    bool is_static = true;
};

/// Ordered path list; index 0 is the line-of-sight path, then the static
/// NLoS paths, then the dynamic ones.
struct PathSet
{
    std::vector<PathParams> paths;
    int l_s = 0;
    int l_d = 0;

    int size() const { return static_cast<int>(paths.size()); }
    const PathParams &los() const { return paths.front(); }
};

/// Per-frame clock offsets, piecewise constant within a frame.
struct ClockRealization
{
    std::vector<double> cfo_per_frame; // Hz
    std::vector<double> to_per_frame;  // s

    int frames() const { return static_cast<int>(cfo_per_frame.size()); }
};

enum class ClockMode
{
    per_frame,     // independent draw per frame
    constant_run,  // one draw for the whole run
};

enum class BeamDesign
{
    bartlett,
    nullspace,
    hybrid,
    sinr,
    mvdr,
};

std::string to_string(BeamDesign d);
BeamDesign beam_design_from_string(const std::string &s);

/// Full experiment parameterisation. Field names match the snake_case
/// configuration keys one to one.
struct ScenarioConfig
{
    int n_r = 16;
    int n_rf = 2;
    double f0 = 26e9;
    double bandwidth = 100e6;
    int k = 32;
    double delta_f = 3.125e6;
    double t_s = 0.32e-6;
    double t_b = 0.32e-6;
    int m_s = 16;
    int m_c = 32;
    int m_f = 1024;
    double t_f = 327.68e-6;
    int p = 0; // 0: automatic, 4 snapshots at SNR >= 0 dB and 16 below
    int l_s = 2;
    int l_d = 3;
    double tau_max = 0.32e-6;
    double f_max = 1.0 / (2.0 * 327.68e-6);
    double snr_db = 18.0;
    double cfo_range = 3.125e6 / 2.0;
    double to_range = 0.32e-6;
    int g_theta = 2048;
    int g_d = 1024;
    int g_tau = 1024;
    int n_prime = 256;
    std::uint64_t rng_seed = 1;

    // Knobs beyond the core parameter set.
    double min_aoa_separation_deg = 5.0;
    double aoa_span_deg = 80.0;
    double nlos_gain_min_db = -10.0;
    double nlos_gain_max_db = -3.0;
    ClockMode clock_mode = ClockMode::per_frame;
    int beam_subcarrier = 0;
    double hybrid_rho = 0.5;
    double ratio_floor = 1e-3;
    bool dd_refine = false;
    bool dd_aoa_refine = false;

    int n_paths() const { return l_s + l_d; }
    int k_tilde() const { return k / 2; }
    int scan_slots() const { return n_r / 2; }
    int snapshots() const { return p > 0 ? p : (snr_db >= 0.0 ? 4 : 16); }
    double noise_sigma() const;

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

} // namespace ulsense

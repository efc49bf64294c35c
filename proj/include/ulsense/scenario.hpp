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

#include <random>
#include <span>

#include "ulsense/types.hpp"

namespace ulsense {

/// Deterministic 64-bit mixer (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for an independent stream, a pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0);

using Rng = std::mt19937_64;

/// Draws a multipath scenario: uniform AoAs on [-span, span] with a minimum
/// pairwise separation, uniform delays on (0, tau_max) with the LoS delay
/// forced to the minimum, uniform Dopplers on (-f_max, f_max) for the
/// dynamic paths. The LoS amplitude is 1; NLoS amplitudes are log-uniform
/// between nlos_gain_min_db and nlos_gain_max_db, phases uniform.
///
/// Throws ConfigError when the separation cannot be met within 100*L
/// rejection rounds.
PathSet sample_scenario(const ScenarioConfig &cfg, std::uint64_t seed);

/// Per-frame CFO uniform on [-cfo_range, cfo_range] and TO uniform on
/// [0, to_range). With ClockMode::constant_run every frame shares one draw.
ClockRealization sample_clock(const ScenarioConfig &cfg, int n_frames, std::uint64_t seed);

/// Offset-free channel coefficients e^{-j2 pi tau f_k} e^{j2 pi f_D t} beta
/// for every path, f_k = f0 + k delta_f.
CVec channel_coeffs(const ScenarioConfig &cfg, const PathSet &paths, int k, double t);

/// Combined clock term eta for subcarrier k in the given frame. The CFO
/// phase is taken at the frame start and held for the frame.
cplx clock_phase(const ScenarioConfig &cfg, const ClockRealization &clock, int frame, double frame_start, int k);

/// Steering matrix A = [a(theta_0) ... a(theta_{L-1})].
CMat steering_matrix(const PathSet &paths, int n_r);

/// Where a received sample sits in time.
struct SampleTime
{
    int frame = 0;           // index into the clock realisation
    double frame_start = 0;  // s, absolute
    double offset = 0;       // s, from the frame start
    double absolute() const { return frame_start + offset; }
};

/// Synthesises y = eta_k W^H A h_k x + W^H n, with n ~ CN(0, sigma^2 I)
/// drawn per antenna. Columns of W must have unit norm.
CVec receive(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
             const CMat &w, cplx x, int k, const SampleTime &when, double noise_sigma, Rng &rng);

/// Same as receive() with a precomputed steering matrix.
CVec receive(const ScenarioConfig &cfg, const PathSet &paths, const CMat &steering,
             const ClockRealization &clock, const CMat &w, cplx x, int k, const SampleTime &when,
             double noise_sigma, Rng &rng);

/// Circular complex Gaussian vector, variance sigma^2 per entry.
CVec complex_gaussian(int n, double sigma, Rng &rng);

/// Uniform random QPSK symbols (unit modulus).
cplx random_qpsk(Rng &rng);

} // namespace ulsense

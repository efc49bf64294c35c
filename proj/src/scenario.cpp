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

#include "ulsense/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "ulsense/array.hpp"

namespace ulsense {

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b)
{
    return mix_seed(mix_seed(mix_seed(root) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

namespace {

double uniform01(Rng &rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double uniform_open(Rng &rng, double lo, double hi)
{
    double u = 0.0;
    do {
        u = uniform01(rng);
    } while (u == 0.0);
    return lo + (hi - lo) * u;
}

} // namespace

CVec complex_gaussian(int n, double sigma, Rng &rng)
{
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
    CVec out(n);
    for (int i = 0; i < n; ++i) {
        const double re = normal(rng);
        out[i] = cplx(re, normal(rng));
    }
    return out;
}

cplx random_qpsk(Rng &rng)
{
    static const double h = 1.0 / std::sqrt(2.0);
    switch (rng() >> 62) {
    case 0: return {h, h};
    case 1: return {-h, h};
    case 2: return {-h, -h};
    default: return {h, -h};
    }
}

PathSet sample_scenario(const ScenarioConfig &cfg, std::uint64_t seed)
{
    const int l = cfg.n_paths();
    if (l < 1)
        throw ConfigError("l_s", "at least one (LoS) path is required");
    if (cfg.l_s < 1)
        throw ConfigError("l_s", "the LoS path is static, l_s must be >= 1");

    Rng rng(mix_seed(seed));
    PathSet set;
    set.l_s = cfg.l_s;
    set.l_d = cfg.l_d;
    set.paths.resize(l);

    const double span = deg2rad(cfg.aoa_span_deg);
    const double min_sep = deg2rad(cfg.min_aoa_separation_deg);
    std::vector<double> aoas;
    int rounds = 0;
    while (static_cast<int>(aoas.size()) < l) {
        if (rounds++ >= 100 * l)
            throw ConfigError("min_aoa_separation_deg",
                              "cannot place " + std::to_string(l) + " paths with the requested separation");
        const double cand = -span + 2.0 * span * uniform01(rng);
        const bool ok = std::all_of(aoas.begin(), aoas.end(),
                                    [&](double a) { return std::abs(a - cand) >= min_sep; });
        if (ok)
            aoas.push_back(cand);
    }

    std::vector<double> delays(l);
    for (;;) {
        for (auto &d : delays)
            d = uniform_open(rng, 0.0, cfg.tau_max);
        auto sorted = delays;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end())
            break;
    }
    std::iter_swap(delays.begin(), std::min_element(delays.begin(), delays.end()));

    for (int i = 0; i < l; ++i) {
        auto &p = set.paths[i];
        p.aoa = aoas[i];
        p.delay = delays[i];
        p.is_static = i < cfg.l_s;
        if (!p.is_static) {
            double f = 0.0;
            do {
                f = uniform_open(rng, -cfg.f_max, cfg.f_max);
            } while (f == 0.0);
            p.doppler = f;
        }
        double amp = 1.0;
        if (i > 0) {
            const double db = cfg.nlos_gain_min_db + (cfg.nlos_gain_max_db - cfg.nlos_gain_min_db) * uniform01(rng);
            amp = std::min(std::pow(10.0, db / 20.0), std::sqrt(0.5));
        }
        p.gain = std::polar(amp, 2.0 * kPi * uniform01(rng));
    }
    return set;
}

ClockRealization sample_clock(const ScenarioConfig &cfg, int n_frames, std::uint64_t seed)
{
    if (n_frames < 1)
        throw ContractError("sample_clock: n_frames must be >= 1");
    Rng rng(mix_seed(seed ^ 0x5bd1e995ULL));
    ClockRealization clock;
    clock.cfo_per_frame.resize(n_frames);
    clock.to_per_frame.resize(n_frames);
    for (int i = 0; i < n_frames; ++i) {
        if (cfg.clock_mode == ClockMode::constant_run && i > 0) {
            clock.cfo_per_frame[i] = clock.cfo_per_frame[0];
            clock.to_per_frame[i] = clock.to_per_frame[0];
            continue;
        }
        clock.cfo_per_frame[i] = cfg.cfo_range * (2.0 * uniform01(rng) - 1.0);
        clock.to_per_frame[i] = cfg.to_range * uniform01(rng);
    }
    return clock;
}

CVec channel_coeffs(const ScenarioConfig &cfg, const PathSet &paths, int k, double t)
{
    if (k < 0 || k >= cfg.k)
        throw ContractError("channel_coeffs: subcarrier index out of range");
    const double fk = cfg.f0 + k * cfg.delta_f;
    CVec h(paths.size());
    for (int l = 0; l < paths.size(); ++l) {
        const auto &p = paths.paths[l];
        h[l] = cis_cycles(-p.delay * fk) * cis_cycles(p.doppler * t) * p.gain;
    }
    return h;
}

cplx clock_phase(const ScenarioConfig &cfg, const ClockRealization &clock, int frame, double frame_start, int k)
{
    if (frame < 0 || frame >= clock.frames())
        throw ContractError("clock_phase: frame outside the clock realisation");
    const double fk = cfg.f0 + k * cfg.delta_f;
    return cis_cycles(clock.cfo_per_frame[frame] * frame_start) * cis_cycles(-clock.to_per_frame[frame] * fk);
}

CMat steering_matrix(const PathSet &paths, int n_r)
{
    CMat a(n_r, paths.size());
    for (int l = 0; l < paths.size(); ++l)
        a.col(l) = steering_vector(paths.paths[l].aoa, n_r);
    return a;
}

CVec receive(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
             const CMat &w, cplx x, int k, const SampleTime &when, double noise_sigma, Rng &rng)
{
    return receive(cfg, paths, steering_matrix(paths, cfg.n_r), clock, w, x, k, when, noise_sigma, rng);
}

CVec receive(const ScenarioConfig &cfg, const PathSet &paths, const CMat &steering,
             const ClockRealization &clock, const CMat &w, cplx x, int k, const SampleTime &when,
             double noise_sigma, Rng &rng)
{
    if (w.rows() != cfg.n_r)
        throw ContractError("receive: beam matrix must have n_r rows");
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        if (std::abs(w.col(c).norm() - 1.0) > 1e-9)
            throw ContractError("receive: beamforming columns must have unit norm");

    const cplx eta = clock_phase(cfg, clock, when.frame, when.frame_start, k);
    const CVec r_clean = eta * (steering * channel_coeffs(cfg, paths, k, when.absolute())) * x;
    if (noise_sigma > 0.0)
        return w.adjoint() * (r_clean + complex_gaussian(cfg.n_r, noise_sigma, rng));
    return w.adjoint() * r_clean;
}

} // namespace ulsense

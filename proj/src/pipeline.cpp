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

#include "ulsense/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "ulsense/array.hpp"

namespace ulsense {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

TrialStreams TrialStreams::from(std::uint64_t trial_seed)
{
    return {derive_seed(trial_seed, 1), derive_seed(trial_seed, 2), derive_seed(trial_seed, 3),
            derive_seed(trial_seed, 4)};
}

AesRawOutputs simulate_aes(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
                           double noise_sigma, Rng &rng)
{
    const int n_p = cfg.snapshots();
    const int slots = cfg.scan_slots();
    const Codebook codebook(cfg.n_r);
    const CMat steering = steering_matrix(paths, cfg.n_r);
    AesRawOutputs raw(n_p, slots, cfg.k);
    for (int p = 0; p < n_p; ++p) {
        const double start = p * cfg.t_f;
        for (int m = 0; m < slots; ++m) {
            const CMat w = scanning_beam_pair(codebook, m).as_matrix();
            const SampleTime when{p, start, m * cfg.t_b};
            for (int k = 0; k < cfg.k; ++k)
                raw.at(p, m, k) = receive(cfg, paths, steering, clock, w, cplx(1.0), k, when, noise_sigma, rng);
        }
    }
    return raw;
}

CFrameOutputs simulate_cframes(const ScenarioConfig &cfg, const PathSet &paths, const ClockRealization &clock,
                               const CVec &w_c, double noise_sigma, Rng &rng, RatioMode mode)
{
    const int first = cfg.snapshots();
    const Codebook codebook(cfg.n_r);
    const CMat steering = steering_matrix(paths, cfg.n_r);
    CFrameOutputs out(cfg.n_r, cfg.m_c, cfg.k);
    CMat w(cfg.n_r, 2);
    w.col(0) = w_c;
    for (int b = 0; b < cfg.n_r; ++b) {
        w.col(1) = codebook.column(b);
        const int frame = first + b;
        for (int m = 0; m < cfg.m_c; ++m) {
            const SampleTime when{frame, frame * cfg.t_f, m * cfg.t_s};
            for (int k = 0; k < cfg.k; ++k) {
                const cplx x = random_qpsk(rng);
                const CVec y = receive(cfg, paths, steering, clock, w, x, k, when, noise_sigma, rng);
                out.yc(b, m, k) = mode == RatioMode::ratio ? y[0] : x;
                out.ys(b, m, k) = y[1];
            }
        }
    }
    return out;
}

const BeamVector &BeamSet::get(BeamDesign d) const
{
    switch (d) {
    case BeamDesign::bartlett: return bartlett;
    case BeamDesign::nullspace: return nullspace;
    case BeamDesign::hybrid: return hybrid;
    case BeamDesign::sinr: return sinr;
    case BeamDesign::mvdr: return mvdr;
    }
    throw ContractError("BeamSet::get: unknown design");
}

BeamSet design_beams(const ScenarioConfig &cfg, const AesSnapshotSet &s, const std::vector<double> &angles)
{
    const int n = s.n_r();
    const int l = static_cast<int>(angles.size());
    const Codebook codebook(n);

    BeamSet set;
    set.virtual_snapshots = codebook.stacked() * s.slice(0, cfg.beam_subcarrier);

    const CMat cov = smoothed_covariance_aes(s);
    set.noise_power = std::max(0.0, estimate_noise_power(cov, l));
    set.gain_moment = gain_moment(estimate_gains_ls(angles, set.virtual_snapshots.col(0)));

    set.bartlett = bartlett(angles, n);
    set.nullspace = nullspace_beam(angles, set.virtual_snapshots);
    set.hybrid = hybrid_beam(angles, set.virtual_snapshots, cfg.hybrid_rho);
    set.sinr = sinr_beam(angles, set.gain_moment, set.noise_power, n);
    set.mvdr = mvdr_beam(codebook.stacked() * cov * codebook.stacked().adjoint(), angles.front());
    return set;
}

DdSearchOptions search_options(const ScenarioConfig &cfg)
{
    DdSearchOptions opt;
    opt.g_d = cfg.g_d;
    opt.g_tau = cfg.g_tau;
    opt.t_f = cfg.t_f;
    opt.delta_f = cfg.delta_f;
    opt.parabolic_refine = cfg.dd_refine;
    opt.aoa_refine = cfg.dd_aoa_refine;
    return opt;
}

DdSnapshotSample simulate_dd_snapshot(const ScenarioConfig &cfg, std::uint64_t seed, BeamDesign design,
                                      RatioMode mode)
{
    const TrialStreams streams = TrialStreams::from(seed);
    DdSnapshotSample out;
    out.truth = sample_scenario(cfg, streams.scenario_seed);
    const ClockRealization clock = sample_clock(cfg, cfg.snapshots() + cfg.n_r, streams.clock_seed);

    std::vector<double> angles;
    CVec gains(out.truth.size());
    for (int l = 0; l < out.truth.size(); ++l) {
        angles.push_back(out.truth.paths[l].aoa);
        gains[l] = out.truth.paths[l].gain;
    }
    const int n = cfg.n_r;
    const CVec r = steering_columns(angles, n) * gains;
    const double sigma = cfg.noise_sigma();
    BeamVector w;
    switch (design) {
    case BeamDesign::bartlett: w = bartlett(angles, n); break;
    case BeamDesign::nullspace: w = nullspace_beam(angles, r); break;
    case BeamDesign::hybrid: w = hybrid_beam(angles, r, cfg.hybrid_rho); break;
    case BeamDesign::sinr: w = sinr_beam(angles, gains, sigma * sigma, n); break;
    case BeamDesign::mvdr:
        w = mvdr_beam(r * r.adjoint() + sigma * sigma * CMat::Identity(n, n), angles.front());
        break;
    }
    Rng rng(streams.dde_seed);
    out.snapshot = build_dd_snapshot(simulate_cframes(cfg, out.truth, clock, w.weights, sigma, rng, mode),
                                     cfg.ratio_floor);
    return out;
}

TrialResult run_trial(const ScenarioConfig &cfg, std::uint64_t seed, const TrialOptions &opt)
{
    TrialResult res;
    res.seed = seed;
    res.snr_db = cfg.snr_db;
    res.los_gain.fill(std::numeric_limits<double>::quiet_NaN());
    const TrialStreams streams = TrialStreams::from(seed);
    const double sigma = cfg.noise_sigma();
    const int l = cfg.n_paths();

    try {
        res.truth = sample_scenario(cfg, streams.scenario_seed);
        const ClockRealization clock = sample_clock(cfg, cfg.snapshots() + cfg.n_r, streams.clock_seed);

        const auto t_aes = std::chrono::steady_clock::now();
        Rng aes_rng(streams.aes_seed);
        const AesSnapshotSet s = stack_aes_snapshots(simulate_aes(cfg, res.truth, clock, sigma, aes_rng), cfg.n_r);
        const AoaSearchResult found = estimate_aoas(s, l, cfg);
        if (!found.ok) {
            res.failure = "aes: fewer than L spectrum peaks";
            res.aes_ms = elapsed_ms(t_aes);
            return res;
        }
        res.aoa.angles = found.angles;
        res.aoa.los_angle = detect_los(s, found.angles, cfg);
        const std::vector<double> angles = res.aoa.los_first();
        const BeamSet beams = design_beams(cfg, s, angles);
        res.aes_ok = true;
        res.aes_ms = elapsed_ms(t_aes);

        for (BeamDesign d : {BeamDesign::bartlett, BeamDesign::nullspace, BeamDesign::hybrid, BeamDesign::sinr,
                             BeamDesign::mvdr})
            res.los_gain[static_cast<int>(d)] = beams.get(d).gain_towards(res.truth.los().aoa);

        if (!opt.run_dde)
            return res;
        const std::vector<double> targets(angles.begin() + 1, angles.end());
        const DdSearchOptions search = search_options(cfg);
        for (const BeamChoice &choice : opt.beams) {
            DesignOutcome outcome;
            outcome.beam = choice;
            const auto t_dde = std::chrono::steady_clock::now();
            try {
                const BeamVector w = choice.design == BeamDesign::hybrid
                                         ? hybrid_beam(angles, beams.virtual_snapshots, choice.rho)
                                         : beams.get(choice.design);
                Rng dde_rng(streams.dde_seed);
                const CFrameOutputs frames =
                    simulate_cframes(cfg, res.truth, clock, w.weights, sigma, dde_rng, opt.ratio_mode);
                const auto snap = build_dd_snapshot(frames, cfg.ratio_floor);
                if (!snap) {
                    outcome.failure = "dde: too many invalid ratio samples";
                } else {
                    outcome.estimate = ab2fm(*snap, targets, res.aoa.los_angle, l, search);
                    outcome.ok = true;
                }
            } catch (const std::exception &e) {
                outcome.failure = std::string("dde: ") + e.what();
            }
            outcome.dde_ms = elapsed_ms(t_dde);
            res.dde.push_back(std::move(outcome));
        }
    } catch (const std::exception &e) {
        res.aes_ok = false;
        res.failure = e.what();
    }
    return res;
}

} // namespace ulsense

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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ulsense/aoa.hpp"
#include "ulsense/array.hpp"
#include "ulsense/beams.hpp"
#include "ulsense/config.hpp"
#include "ulsense/ddest.hpp"
#include "ulsense/harness.hpp"
#include "ulsense/pipeline.hpp"
#include "ulsense/scenario.hpp"

using namespace ulsense;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kDefaultConfig = fs::path(ULSENSE_SOURCE_DIR) / "configs" / "default.cfg";

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path scratch(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("ulsense_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string x;
        while (std::getline(ss, x, ','))
            f.push_back(x);
        rows.push_back(f);
    }
    return rows;
}

// accuracy.csv lookup: (snr, parameter, beam) -> accuracy.
double accuracy_of(const fs::path &dir, double snr, const std::string &param, const std::string &beam)
{
    for (const auto &r : read_csv(dir / "accuracy.csv"))
        if (std::stod(r[0]) == snr && r[1] == param && r[2] == beam)
            return std::stod(r[4]);
    return -1.0;
}

// gain.csv lookup: (snr, beam) -> mean gain in dB.
double mean_gain_db(const fs::path &dir, double snr, const std::string &beam)
{
    for (const auto &r : read_csv(dir / "gain.csv"))
        if (std::stod(r[0]) == snr && r[1] == beam)
            return std::stod(r[2]);
    return -1e9;
}

RVec eigenvalues_desc(const CMat &m)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

ClockRealization zero_clock(int frames)
{
    return ClockRealization{std::vector<double>(frames, 0.0), std::vector<double>(frames, 0.0)};
}

struct Verdict
{
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------

Verdict rank_restoration()
{
    ScenarioConfig cfg;
    cfg.p = 16;
    const auto t0 = Clock::now();
    int ok = 0;
    double worst_smooth = 1e300, worst_single = 1e300, worst_excess = 0.0;
    for (int i = 0; i < 20; ++i) {
        const PathSet ps = sample_scenario(cfg, derive_seed(2024, 1, i));
        Rng rng(0);
        const AesSnapshotSet s = stack_aes_snapshots(simulate_aes(cfg, ps, zero_clock(cfg.p), 0.0, rng), cfg.n_r);
        const RVec sm = eigenvalues_desc(smoothed_covariance_aes(s));
        const RVec one = eigenvalues_desc(subcarrier_covariance_aes(s, 0));
        const double r_smooth = sm[4] / sm[5];
        const double r_single = one[3] / one[4];
        const double excess = one[4] / one[3];
        worst_smooth = std::min(worst_smooth, r_smooth);
        worst_single = std::min(worst_single, r_single);
        worst_excess = std::max(worst_excess, excess);
        ok += r_smooth > 1e6 && r_single > 1e6 && excess < 1e-6;
    }
    const double secs = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%d/20 scenarios; min l5/l6 smoothed %.2e, min l4/l5 single %.2e, max l5/l4 single %.2e; %.2f s", ok,
                  worst_smooth, worst_single, worst_excess, secs);
    return {ok == 20 && secs < 1.0, buf};
}

Verdict oracle_equivalence()
{
    ScenarioConfig cfg;
    cfg.snr_db = 10.0;
    const auto t0 = Clock::now();
    double worst = 0.0;
    int used = 0;
    for (int i = 0; used < 10 && i < 40; ++i) {
        const DdSnapshotSample sample = simulate_dd_snapshot(cfg, derive_seed(2024, 2, i));
        if (!sample.snapshot)
            continue;
        ++used;
        for (int l = 1; l < sample.truth.size(); ++l)
            worst = std::max(worst, ab2fm_oracle_deviation(*sample.snapshot, sample.truth.paths[l].aoa, cfg.n_paths(), 64,
                                                           cfg.t_f, cfg.delta_f));
    }
    const double secs = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d noisy snapshots, 64x64 grid, max relative deviation %.3e; %.1f s", used, worst,
                  secs);
    return {used == 10 && worst <= 1e-9 && secs < 30.0, buf};
}

// Noiseless AES -> beam design -> DDE under a given clock; returns the
// (doppler bin, delay bin) of each NLoS target in estimated-angle order.
std::vector<std::pair<long, long>> noiseless_pipeline(const ScenarioConfig &cfg, const PathSet &ps,
                                                      const ClockRealization &clock, RatioMode mode)
{
    Rng rng(1);
    const AesSnapshotSet s = stack_aes_snapshots(simulate_aes(cfg, ps, clock, 0.0, rng), cfg.n_r);
    const AoaSearchResult found = estimate_aoas(s, cfg.n_paths(), cfg);
    if (!found.ok)
        return {};
    const double los = detect_los(s, found.angles, cfg);
    AoaEstimate aoa{found.angles, los};
    const std::vector<double> angles = aoa.los_first();
    const BeamSet beams = design_beams(cfg, s, angles);
    const CFrameOutputs out = simulate_cframes(cfg, ps, clock, beams.nullspace.weights, 0.0, rng, mode);
    const auto snap = build_dd_snapshot(out, cfg.ratio_floor);
    if (!snap)
        return {};
    const std::vector<double> targets(angles.begin() + 1, angles.end());
    const DdSearchOptions opt = search_options(cfg);
    const DdEstimate est = ab2fm(*snap, targets, los, cfg.n_paths(), opt);
    std::vector<std::pair<long, long>> bins;
    for (const auto &t : est.triples)
        bins.emplace_back(std::lround((t.doppler + 1.0 / (2.0 * cfg.t_f)) * opt.g_d * cfg.t_f),
                          std::lround(t.rel_delay * opt.g_tau * cfg.delta_f));
    return bins;
}

ClockRealization adversarial_clock(const ScenarioConfig &cfg, int frames, double cfo_sign, bool reverse)
{
    ClockRealization c;
    for (int i = 0; i < frames; ++i) {
        const int j = reverse ? frames - 1 - i : i;
        c.cfo_per_frame.push_back(cfo_sign * cfg.delta_f / 2.0);
        c.to_per_frame.push_back((static_cast<double>(j) / frames) / cfg.delta_f);
    }
    return c;
}

bool within_one_bin(const std::vector<std::pair<long, long>> &a, const std::vector<std::pair<long, long>> &b, int g_d)
{
    if (a.empty() || a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        long dd = std::labs(a[i].first - b[i].first);
        dd = std::min(dd, g_d - dd);
        if (dd > 1 || std::labs(a[i].second - b[i].second) > 1)
            return false;
    }
    return true;
}

Verdict offset_cancellation()
{
    ScenarioConfig cfg;
    const int frames = cfg.snapshots() + cfg.n_r;
    const ClockRealization a = adversarial_clock(cfg, frames, +1.0, false);
    const ClockRealization b = adversarial_clock(cfg, frames, -1.0, true);
    int ratio_ok = 0, control_ok = 0;
    const int scenarios = 3;
    for (int i = 0; i < scenarios; ++i) {
        const PathSet ps = sample_scenario(cfg, derive_seed(2024, 3, i));
        ratio_ok += within_one_bin(noiseless_pipeline(cfg, ps, a, RatioMode::ratio),
                                   noiseless_pipeline(cfg, ps, b, RatioMode::ratio), cfg.g_d);
        control_ok += within_one_bin(noiseless_pipeline(cfg, ps, a, RatioMode::symbol_only),
                                     noiseless_pipeline(cfg, ps, b, RatioMode::symbol_only), cfg.g_d);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "ratio pipeline agrees within one bin in %d/%d scenarios; symbol-only control agrees in %d/%d", ratio_ok,
                  scenarios, control_ok, scenarios);
    return {ratio_ok == scenarios && control_ok == 0, buf};
}

ExperimentSpec default_spec(const fs::path &out)
{
    ExperimentSpec spec = load_config(kDefaultConfig);
    spec.output_dir = out;
    return spec;
}

Verdict aoa_accuracy()
{
    ExperimentSpec spec = default_spec(scratch("aoa"));
    spec.snr_sweep_db = {18.0};
    spec.trials = 100;
    spec.run_dde = false;
    const auto t0 = Clock::now();
    run_experiment(spec, RunOptions{worker_count(), false, false, true});
    const double secs = seconds_since(t0);
    const double acc = accuracy_of(spec.output_dir, 18.0, "aoa", "ns");
    char buf[160];
    std::snprintf(buf, sizeof buf, "accuracy at 3 deg, 18 dB, 100 trials: %.3f (need >= 0.95); %.1f s", acc, secs);
    return {acc >= 0.95 && secs < 120.0, buf};
}

struct DdRun
{
    double doppler = -1.0, delay = -1.0, secs = 0.0;
};

DdRun dd_run_at_0db()
{
    ExperimentSpec spec = default_spec(scratch("dd0"));
    spec.snr_sweep_db = {0.0};
    spec.trials = 200;
    spec.beams = {BeamChoice{BeamDesign::nullspace, spec.scenario.hybrid_rho}};
    spec.run_dde = true;
    const auto t0 = Clock::now();
    run_experiment(spec, RunOptions{worker_count(), false, false, true});
    DdRun r;
    r.secs = seconds_since(t0);
    r.doppler = accuracy_of(spec.output_dir, 0.0, "doppler", "ns");
    r.delay = accuracy_of(spec.output_dir, 0.0, "delay", "ns");
    return r;
}

Verdict beam_ordering()
{
    ExperimentSpec spec = default_spec(scratch("beams"));
    apply_preset(spec, "fig7");
    spec.snr_sweep_db = {-6.0, 18.0};
    spec.trials = 100;
    run_experiment(spec, RunOptions{worker_count(), false, false, true});
    const fs::path &d = spec.output_dir;
    const std::string hyb = BeamChoice{BeamDesign::hybrid, 0.5}.label();
    const double bb = mean_gain_db(d, -6.0, "bartlett"), hb = mean_gain_db(d, -6.0, hyb);
    const double si = mean_gain_db(d, -6.0, "sinr"), mv = mean_gain_db(d, -6.0, "mvdr");
    const double ns = mean_gain_db(d, -6.0, "ns");
    const double si18 = mean_gain_db(d, 18.0, "sinr"), ns18 = mean_gain_db(d, 18.0, "ns");
    const bool order = bb - hb >= 0.5 && hb - std::max(si, mv) >= 0.5 && std::min(si, mv) - ns >= 0.5;
    const bool converge = std::abs(si18 - ns18) <= 1.0;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "-6 dB mean gain [dB]: bartlett %.2f, hybrid %.2f, sinr %.2f, mvdr %.2f, ns %.2f (order with 0.5 dB gaps: "
                  "%s); 18 dB |sinr - ns| = %.2f dB (<= 1: %s)",
                  bb, hb, si, mv, ns, order ? "yes" : "no", std::abs(si18 - ns18), converge ? "yes" : "no");
    return {order && converge, buf};
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Verdict complexity()
{
    ScenarioConfig cfg;
    cfg.snr_db = 10.0;
    const DdSnapshotSample sample = simulate_dd_snapshot(cfg, derive_seed(2024, 8, 0));
    if (!sample.snapshot)
        return {false, "snapshot rejected"};
    const CMat cov = smoothed_covariance_dd(*sample.snapshot);
    Eigen::SelfAdjointEigenSolver<CMat> es(cov);
    const int dim = static_cast<int>(cov.rows());
    const int l = 5;
    const CMat signal = es.eigenvectors().rightCols(l);
    const CMat noise = es.eigenvectors().leftCols(dim - l);
    const double theta = sample.truth.paths[1].aoa;
    const int g = 256;
    DdSearchOptions opt = search_options(cfg);
    opt.g_d = g;
    opt.g_tau = g;
    std::vector<double> fg(g), tg(g);
    for (int i = 0; i < g; ++i) {
        fg[i] = dd_grid_doppler(i, g, cfg.t_f);
        tg[i] = dd_grid_delay(i, g, cfg.delta_f);
    }
    std::vector<double> fast, slow;
    double sink = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        auto t0 = Clock::now();
        sink += ab2fm_spectrum(signal, theta, cfg.n_r, cfg.k_tilde(), opt).maxCoeff();
        fast.push_back(seconds_since(t0));
        t0 = Clock::now();
        sink += music3d_oracle(noise, theta, fg, tg, cfg.n_r, cfg.k_tilde(), cfg.t_f, cfg.delta_f).maxCoeff();
        slow.push_back(seconds_since(t0));
    }
    const double ratio = median(slow) / median(fast);
    char buf[200];
    std::snprintf(buf, sizeof buf, "256x256 grid, N_r K~ = %d, L = %d: AB2FM %.4f s, direct %.4f s, speed-up %.1fx%s",
                  dim, l, median(fast), median(slow), ratio, sink > 0 ? "" : " (degenerate spectrum)");
    return {ratio >= 10.0 && dim == 256, buf};
}

Verdict sinr_optimality()
{
    ScenarioConfig cfg;
    int instances = 0, ok = 0, attempts = 0;
    double worst = 0.0;
    while (instances < 100 && attempts < 300) {
        ++attempts;
        cfg.snr_db = -10.0 + 30.0 * (attempts % 7) / 6.0;
        const TrialStreams st = TrialStreams::from(derive_seed(2024, 9, attempts));
        const PathSet ps = sample_scenario(cfg, st.scenario_seed);
        const ClockRealization clock = sample_clock(cfg, cfg.snapshots(), st.clock_seed);
        Rng rng(st.aes_seed);
        const AesSnapshotSet s = stack_aes_snapshots(simulate_aes(cfg, ps, clock, cfg.noise_sigma(), rng), cfg.n_r);
        const AoaSearchResult found = estimate_aoas(s, cfg.n_paths(), cfg);
        if (!found.ok)
            continue;
        const AoaEstimate aoa{found.angles, detect_los(s, found.angles, cfg)};
        const std::vector<double> angles = aoa.los_first();
        const BeamSet beams = design_beams(cfg, s, angles);
        ++instances;
        const CMat r0 = los_covariance(angles, beams.gain_moment, cfg.n_r);
        const CMat rn = interference_covariance(angles, beams.gain_moment, beams.noise_power, cfg.n_r);
        const double q = rayleigh_quotient(beams.sinr.weights, r0, rn);
        bool best = true;
        for (const BeamVector *w : {&beams.bartlett, &beams.hybrid, &beams.nullspace, &beams.mvdr}) {
            const double other = rayleigh_quotient(w->weights, r0, rn);
            worst = std::max(worst, (other - q) / q);
            best = best && q >= other * (1.0 - 1e-9);
        }
        ok += best;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d/%d pipeline instances optimal; largest relative excess of another beam %.2e", ok,
                  instances, worst);
    return {instances == 100 && ok == 100, buf};
}

Verdict determinism()
{
    ExperimentSpec spec = default_spec(scratch("det1"));
    apply_preset(spec, "fig4");
    const auto t0 = Clock::now();
    run_experiment(spec, RunOptions{1, false, false, true});
    const fs::path one = spec.output_dir;
    spec.output_dir = scratch("det8");
    run_experiment(spec, RunOptions{8, false, false, true});
    int files = 0, same = 0;
    for (const auto &e : fs::directory_iterator(one)) {
        if (e.path().extension() != ".csv")
            continue;
        ++files;
        same += slurp(e.path()) == slurp(spec.output_dir / e.path().filename());
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "preset fig4 (%zu SNR x %d trials): %d/%d CSV files byte-identical, 1 vs 8 workers; %.0f s",
                  spec.snr_sweep_db.size(), spec.trials, same, files, seconds_since(t0));
    return {files >= 6 && same == files, buf};
}

} // namespace

int main()
{
    int failures = 0;
    auto report = [&](int id, const char *name, const Verdict &v) {
        std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    };
    auto guarded = [](const std::function<Verdict()> &f) {
        try {
            return f();
        } catch (const std::exception &e) {
            return Verdict{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "rank restoration", guarded(rank_restoration));
    report(2, "AB2FM equals direct search", guarded(oracle_equivalence));
    report(3, "CFO/TO cancellation", guarded(offset_cancellation));
    report(4, "AoA accuracy", guarded(aoa_accuracy));

    DdRun dd;
    std::string dd_error;
    try {
        dd = dd_run_at_0db();
    } catch (const std::exception &e) {
        dd_error = e.what();
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "Doppler accuracy at 0 dB, NS beam, 200 trials: %.3f (need >= 0.85); %.0f s", dd.doppler,
                  dd.secs);
    report(5, "Doppler accuracy", {dd_error.empty() && dd.doppler >= 0.85 && dd.secs < 600.0,
                                   dd_error.empty() ? buf : "exception: " + dd_error});
    std::snprintf(buf, sizeof buf, "delay accuracy at 0 dB, same run: %.3f (need >= 0.85)", dd.delay);
    report(6, "delay accuracy", {dd_error.empty() && dd.delay >= 0.85, dd_error.empty() ? buf : "exception: " + dd_error});

    report(7, "beam ordering", guarded(beam_ordering));
    report(8, "AB2FM complexity", guarded(complexity));
    report(9, "SINR beam optimality", guarded(sinr_optimality));
    report(10, "determinism", guarded(determinism));

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

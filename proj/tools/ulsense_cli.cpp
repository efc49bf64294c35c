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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ulsense/config.hpp"
#include "ulsense/harness.hpp"
#include "ulsense/pipeline.hpp"

namespace {

using namespace ulsense;

int cmd_run(const std::string &config, const std::string &preset, const std::string &snr, int trials,
            const std::string &seed, const std::string &out, const std::string &beam, int workers, bool timings,
            bool resume, bool quiet)
{
    ExperimentSpec spec = load_config(config);
    if (!preset.empty())
        apply_preset(spec, preset);
    if (!snr.empty())
        spec.snr_sweep_db = parse_double_list(snr, "snr");
    if (trials > 0)
        spec.trials = trials;
    if (!seed.empty())
        spec.scenario.rng_seed = std::stoull(seed);
    if (!out.empty())
        spec.output_dir = out;
    if (!beam.empty()) {
        ExperimentSpec tmp = parse_config("beam_design = " + beam + "\n");
        spec.beams = tmp.beams;
    }
    spec.validate();

    RunOptions opt;
    opt.workers = workers;
    opt.timings = timings;
    opt.resume = resume;
    opt.quiet = quiet;
    const RunSummary summary = run_experiment(spec, opt);
    std::cout << "trials: " << summary.trials_total << " (resumed " << summary.trials_resumed << ", failed "
              << summary.failed_trials << ")\n";
    for (const auto &f : summary.files)
        std::cout << "wrote " << f.string() << "\n";
    return 0;
}

int cmd_validate(const std::string &config)
{
    const ExperimentSpec spec = load_config(config);
    std::cout << "ok: " << config << "\n" << serialize_config(spec);
    return 0;
}

int cmd_oracle_check(int instances, int grid, const std::string &seed)
{
    ScenarioConfig cfg;
    cfg.snr_db = 10.0;
    const std::uint64_t root = seed.empty() ? 7 : std::stoull(seed);
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const DdSnapshotSample sample = simulate_dd_snapshot(cfg, derive_seed(root, 0, i));
        if (!sample.snapshot) {
            std::cout << "instance " << i << ": snapshot rejected\n";
            return 1;
        }
        for (int l = 1; l < sample.truth.size(); ++l) {
            const double dev = ab2fm_oracle_deviation(*sample.snapshot, sample.truth.paths[l].aoa, cfg.n_paths(), grid,
                                                      cfg.t_f, cfg.delta_f);
            worst = std::max(worst, dev);
        }
    }
    const bool pass = worst <= 1e-9;
    std::printf("AB2FM vs noise-subspace search: %d instances, %dx%d grid, max relative deviation %.3e [%s]\n",
                instances, grid, grid, worst, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"ulsense: uplink sensing simulator for mmWave hybrid arrays"};
    app.require_subcommand(1);

    std::string config, preset, snr, seed, out, beam;
    int trials = 0, workers = 1;
    bool timings = false, resume = false, quiet = false;
    auto *run = app.add_subcommand("run", "Run a Monte Carlo experiment");
    run->add_option("--config", config, "Configuration file (key = value)")->required()->check(CLI::ExistingFile);
    run->add_option("--preset", preset, "fig4 | fig5 | fig6 | fig6-desk | fig7");
    run->add_option("--snr", snr, "SNR list in dB, e.g. -10,0,10 or -10:20:2");
    run->add_option("--trials", trials, "Trials per SNR point")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Root seed");
    run->add_option("--out", out, "Output directory");
    run->add_option("--beam", beam, "bartlett | ns | hybrid:RHO | sinr | mvdr (comma list allowed)");
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--timings", timings, "Write per-stage wall-clock times instead of NA");
    run->add_flag("--resume", resume, "Continue an interrupted run in the same output directory");
    run->add_flag("--quiet", quiet, "No progress output");

    std::string vconfig;
    auto *validate = app.add_subcommand("validate", "Parse and validate a configuration file");
    validate->add_option("--config", vconfig, "Configuration file")->required()->check(CLI::ExistingFile);

    int instances = 10, grid = 64;
    std::string oseed;
    auto *oracle = app.add_subcommand("oracle-check", "Compare the FFT spectrum with the direct noise-subspace search");
    oracle->add_option("--instances", instances, "Random snapshots")->check(CLI::PositiveNumber);
    oracle->add_option("--grid", grid, "Grid size per axis (power of two, >= 16)");
    oracle->add_option("--seed", oseed, "Root seed");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run)
            return cmd_run(config, preset, snr, trials, seed, out, beam, workers, timings, resume, quiet);
        if (*validate)
            return cmd_validate(vconfig);
        if (*oracle)
            return cmd_oracle_check(instances, grid, oseed);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

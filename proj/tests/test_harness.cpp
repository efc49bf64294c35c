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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ulsense/config.hpp"
#include "ulsense/harness.hpp"

using namespace ulsense;
namespace fs = std::filesystem;
using Catch::Matchers::WithinRel;

namespace {

const fs::path kDefaultConfig = fs::path(ULSENSE_SOURCE_DIR) / "configs" / "default.cfg";

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path &p, const std::string &text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::vector<std::string> lines_of(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l))
        out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(f);
    return out;
}

fs::path scratch(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("ulsense_test_" + name);
    fs::remove_all(p);
    return p;
}

// A spec small enough to run a few trials per test case in seconds.
ExperimentSpec small_spec(const fs::path &out)
{
    ExperimentSpec spec = load_config(kDefaultConfig);
    spec.scenario.g_d = 128;
    spec.scenario.g_tau = 64;
    spec.scenario.g_theta = 512;
    spec.snr_sweep_db = {10.0, 20.0};
    spec.trials = 3;
    spec.beams = {BeamChoice{BeamDesign::nullspace, 0.5}, BeamChoice{BeamDesign::hybrid, 0.25}};
    spec.output_dir = out;
    return spec;
}

std::map<std::string, std::string> outputs(const fs::path &dir)
{
    std::map<std::string, std::string> m;
    for (const auto &e : fs::directory_iterator(dir))
        m[e.path().filename().string()] = slurp(e.path());
    return m;
}

int run_cli(const std::string &args)
{
    const char *cli = std::getenv("ULSENSE_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string("\"") + cli + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("load_config: bundled defaults carry the reference numerology")
{
    const ExperimentSpec spec = load_config(kDefaultConfig);
    const ScenarioConfig &c = spec.scenario;
    CHECK(c.n_r == 16);
    CHECK(c.f0 == 26e9);
    CHECK(c.bandwidth == 100e6);
    CHECK(c.k == 32);
    CHECK(c.delta_f == 3.125e6);
    CHECK_THAT(c.t_s, WithinRel(0.32e-6, 1e-12));
    CHECK(c.m_s == 16);
    CHECK(c.m_c == 32);
    CHECK(c.m_f == 1024);
    CHECK_THAT(c.t_f, WithinRel(327.68e-6, 1e-12));
    CHECK(c.l_s == 2);
    CHECK(c.l_d == 3);
    CHECK(c.snapshots() == 4);
    CHECK(spec.beams == std::vector<BeamChoice>{BeamChoice{BeamDesign::nullspace, 0.5}});
}

TEST_CASE("parse_config: invariant violations name the key")
{
    const std::string base = slurp(kDefaultConfig);
    auto key_of = [&](const std::string &extra_replacement, const std::string &from) {
        std::string text = base;
        const auto pos = text.find(from);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, from.size(), extra_replacement);
        try {
            parse_config(text);
        } catch (const ConfigError &e) {
            return e.key();
        }
        return std::string("<accepted>");
    };
    CHECK(key_of("k = 30", "k = 32") == "k");
    CHECK(key_of("t_s = 0.3e-6", "t_s = 0.32e-6") == "t_s");
    CHECK(key_of("t_f = 300e-6", "t_f = 327.68e-6") == "t_f");
    CHECK(key_of("tau_max = 1e-6", "tau_max = 0.32e-6") == "tau_max");
    CHECK(key_of("f_max = 2000", "f_max = 1525.87890625") == "f_max");
    CHECK(key_of("l_d = 4", "l_d = 3") == "l_d");
    CHECK(key_of("nlos_gain_max_db = -1", "nlos_gain_max_db = -3") == "nlos_gain_max_db");
    CHECK(key_of("g_d = 1000", "g_d = 1024") == "g_d");
    CHECK(key_of("trials = 0", "trials = 100") == "trials");
    CHECK(key_of("beam_design = sideways", "beam_design = ns") == "beam_design");
    CHECK(key_of("n_r = sixteen", "n_r = 16") == "n_r");
    CHECK(key_of("clock_mode = drift", "clock_mode = per_frame") == "clock_mode");
    CHECK(key_of("nonsense_key = 4\nrun_dde = true", "run_dde = true") == "nonsense_key");
    CHECK(key_of("n_r = 16\nn_r = 16", "n_r = 16") == "n_r");
    CHECK(key_of("preset = fig9", "output_dir = results") == "preset");
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/ulsense.cfg"), ConfigError);
}

TEST_CASE("config round trip is the identity")
{
    ExperimentSpec spec = load_config(kDefaultConfig);
    CHECK(parse_config(serialize_config(spec)) == spec);

    spec.scenario.snr_db = -7.25;
    spec.scenario.hybrid_rho = 0.3;
    spec.scenario.dd_refine = true;
    spec.scenario.clock_mode = ClockMode::constant_run;
    spec.scenario.rng_seed = 18446744073709551557ull;
    spec.snr_sweep_db = {-10.0, 0.1, 1.0 / 3.0};
    spec.beams = {BeamChoice{BeamDesign::bartlett, 0.3}, BeamChoice{BeamDesign::hybrid, 0.125},
                  BeamChoice{BeamDesign::mvdr, 0.3}};
    spec.run_dde = false;
    spec.output_dir = "out dir/x";
    const std::string text = serialize_config(spec);
    const ExperimentSpec back = parse_config(text);
    CHECK(back == spec);
    CHECK(serialize_config(back) == text);
}

TEST_CASE("parse_double_list and format_double")
{
    CHECK(parse_double_list("-10,0,10", "snr") == std::vector<double>{-10.0, 0.0, 10.0});
    const auto r = parse_double_list("-10:20:2", "snr");
    REQUIRE(r.size() == 16);
    CHECK(r.front() == -10.0);
    CHECK(r.back() == 20.0);
    CHECK_THROWS_AS(parse_double_list("1:2:0", "snr"), ConfigError);
    CHECK_THROWS_AS(parse_double_list("1,,2", "snr"), ConfigError);
    for (double v : {0.1, 1e-300, 327.68e-6, 1525.87890625, -0.0})
        CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("beam choice labels")
{
    CHECK(BeamChoice::parse("ns") == BeamChoice{BeamDesign::nullspace, 0.5});
    const BeamChoice h = BeamChoice::parse("hybrid:0.25");
    CHECK(h.design == BeamDesign::hybrid);
    CHECK(h.rho == 0.25);
    CHECK(h.label() == "hybrid:0.25");
    CHECK(h.file_tag().find(':') == std::string::npos);
    CHECK(BeamChoice::parse("bartlett").label() == "bartlett");
    CHECK_THROWS_AS(BeamChoice::parse("sinr:0.5"), ConfigError);
    CHECK_THROWS_AS(BeamChoice::parse("hybrid:2"), ConfigError);
}

TEST_CASE("presets")
{
    for (const auto &name : preset_names()) {
        ExperimentSpec spec = load_config(kDefaultConfig);
        apply_preset(spec, name);
        spec.validate();
        CHECK(spec.preset == name);
    }
    ExperimentSpec spec = load_config(kDefaultConfig);
    apply_preset(spec, "fig6-desk");
    CHECK(spec.snr_sweep_db.size() == 16);
    CHECK(spec.trials == 200);
    CHECK(spec.run_dde);
    apply_preset(spec, "fig7");
    CHECK(spec.beams.size() == 5);
    CHECK_FALSE(spec.run_dde);
    CHECK_THROWS_AS(apply_preset(spec, "fig1"), ConfigError);
}

TEST_CASE("record and gain rows survive formatting")
{
    RecordRow r;
    r.seed = 1234567890123ull;
    r.snr_db = -6;
    r.trial = 17;
    r.path_idx = 3;
    r.true_aoa_deg = -41.123456789012345;
    r.true_doppler_hz = 733.3;
    r.true_delay_s = 1.5e-7;
    r.est_aoa_deg = -41.1;
    r.est_doppler_hz = std::numeric_limits<double>::quiet_NaN();
    r.est_delay_s = 1.49e-7;
    r.matched = true;
    r.aes_ms = std::numeric_limits<double>::quiet_NaN();
    r.dde_ms = std::numeric_limits<double>::quiet_NaN();
    const std::string line = format_record(r);
    CHECK(split(line).size() == 13);
    CHECK(line.find("NA") != std::string::npos);
    const RecordRow b = parse_record(line);
    CHECK(b.seed == r.seed);
    CHECK(b.true_aoa_deg == r.true_aoa_deg);
    CHECK(std::isnan(b.est_doppler_hz));
    CHECK(b.est_delay_s == r.est_delay_s);
    CHECK(b.matched);
    CHECK(format_record(b) == line);
    CHECK_THROWS(parse_record("1,2,3"));

    GainRow g{99, 18.0, 4, "hybrid:0.5", 15.25};
    CHECK(format_gain(parse_gain(format_gain(g))) == format_gain(g));
}

TEST_CASE("fnv1a64 reference values")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(block_checksum_line("a") == "#fnv1a64=af63dc4c8601ec8c");
}

TEST_CASE("run_experiment: one trial at one SNR writes one trial record")
{
    const fs::path dir = scratch("one");
    ExperimentSpec spec = small_spec(dir);
    spec.snr_sweep_db = {18.0};
    spec.trials = 1;
    spec.beams = {BeamChoice{}};
    const RunSummary s = run_experiment(spec, RunOptions{});
    CHECK(s.trials_total == 1);
    const auto lines = lines_of(slurp(dir / "records_ns.csv"));
    REQUIRE(lines.size() == 1 + 5 + 1);
    CHECK(lines[0] == kRecordHeader);
    CHECK(lines.back().rfind("#fnv1a64=", 0) == 0);
    for (int i = 1; i <= 5; ++i) {
        const RecordRow r = parse_record(lines[i]);
        CHECK(r.trial == 0);
        CHECK(r.path_idx == i - 1);
        CHECK(r.snr_db == 18.0);
        CHECK(std::isnan(r.aes_ms));
    }
    const RecordRow los = parse_record(lines[1]);
    CHECK(los.true_delay_s == 0.0);
    CHECK(std::isnan(los.est_doppler_hz));
    CHECK(lines_of(slurp(dir / "gains_trials.csv")).size() == 1 + 5 + 1);
    for (const char *f : {"nmse.csv", "ccdf.csv", "accuracy.csv", "gain.csv", "run_config.cfg"})
        CHECK(fs::exists(dir / f));
    CHECK(parse_config(slurp(dir / "run_config.cfg")) == spec);
}

TEST_CASE("run_experiment: curve files follow their schemas")
{
    const fs::path dir = scratch("curves");
    const ExperimentSpec spec = small_spec(dir);
    run_experiment(spec, RunOptions{});

    const auto acc = lines_of(slurp(dir / "accuracy.csv"));
    CHECK(acc[0] == "snr_db,parameter,beam_design,epsilon,accuracy,correct,total");
    CHECK(acc.size() == 1 + 2 * 3 * 2);
    std::map<std::string, int> seen;
    for (std::size_t i = 1; i < acc.size(); ++i) {
        const auto f = split(acc[i]);
        REQUIRE(f.size() == 7);
        ++seen[f[0] + "|" + f[1] + "|" + f[2]];
        const double a = std::stod(f[4]);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        const int total = std::stoi(f[6]);
        CHECK(total == (f[1] == "aoa" ? 15 : 12));
    }
    for (const auto &[k, n] : seen)
        CHECK(n == 1);

    CHECK(lines_of(slurp(dir / "nmse.csv"))[0] == "snr_db,parameter,beam_design,nmse,pairs,missing");

    const auto cc = lines_of(slurp(dir / "ccdf.csv"));
    CHECK(cc[0] == "snr_db,parameter,beam_design,threshold,ccdf");
    CHECK(cc.size() == 1 + 12 * 41);
    std::string group;
    double prev = 2.0;
    for (std::size_t i = 1; i < cc.size(); ++i) {
        const auto f = split(cc[i]);
        const std::string g = f[0] + "|" + f[1] + "|" + f[2];
        const double v = std::stod(f[4]);
        if (g != group) {
            group = g;
            prev = 2.0;
        }
        CHECK(v <= prev);
        prev = v;
    }

    const auto gn = lines_of(slurp(dir / "gain.csv"));
    CHECK(gn[0] == "snr_db,beam_design,mean_gain_db,p10_db,p25_db,p50_db,p75_db,p90_db,n");
    CHECK(gn.size() == 1 + 2 * 5);
    for (std::size_t i = 1; i < gn.size(); ++i) {
        const auto f = split(gn[i]);
        REQUIRE(f.size() == 9);
        for (int c = 3; c < 7; ++c)
            CHECK(std::stod(f[c]) <= std::stod(f[c + 1]));
        CHECK(std::stod(f[2]) <= 10.0 * std::log10(16.0) + 1e-9);
    }
}

TEST_CASE("run_experiment: identical bytes for repeated runs and any worker count")
{
    const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    ExperimentSpec spec = small_spec(a);
    run_experiment(spec, RunOptions{1, false, false, true});
    spec.output_dir = b;
    run_experiment(spec, RunOptions{1, false, false, true});
    spec.output_dir = c;
    run_experiment(spec, RunOptions{4, false, false, true});
    auto oa = outputs(a), ob = outputs(b), oc = outputs(c);
    oa.erase("run_config.cfg");
    ob.erase("run_config.cfg");
    oc.erase("run_config.cfg");
    CHECK(oa == ob);
    CHECK(oa == oc);
}

TEST_CASE("run_experiment: resume after a torn write reproduces the full run")
{
    const fs::path full = scratch("res_full"), part = scratch("res_part");
    ExperimentSpec spec = small_spec(full);
    run_experiment(spec, RunOptions{2, false, false, true});

    spec.output_dir = part;
    ExperimentSpec head = spec;
    run_experiment(spec, RunOptions{2, false, false, true});
    // Tear the record file in the middle of its fourth trial block and drop
    // the last gain block entirely.
    const std::string rec = slurp(part / "records_ns.csv");
    std::size_t cut = 0;
    for (int i = 0; i < 3; ++i)
        cut = rec.find("#fnv1a64=", cut) + 1;
    cut = rec.find('\n', cut) + 1;
    spit(part / "records_ns.csv", rec.substr(0, cut + 40));
    const std::string gains = slurp(part / "gains_trials.csv");
    spit(part / "gains_trials.csv", gains.substr(0, gains.rfind("#fnv1a64=", gains.size() - 2)));
    fs::remove(part / "accuracy.csv");

    const RunSummary s = run_experiment(head, RunOptions{3, false, true, true});
    CHECK(s.trials_resumed == 3);
    CHECK(s.trials_total == 6);
    auto of = outputs(full), op = outputs(part);
    of.erase("run_config.cfg");
    op.erase("run_config.cfg");
    CHECK(of == op);

    ExperimentSpec other = head;
    other.trials = 4;
    CHECK_THROWS_AS(run_experiment(other, RunOptions{1, false, true, true}), ConfigError);
}

TEST_CASE("run_experiment: corrupted block checksum is not trusted")
{
    const fs::path full = scratch("crc_full"), part = scratch("crc_part");
    ExperimentSpec spec = small_spec(full);
    spec.snr_sweep_db = {15.0};
    run_experiment(spec, RunOptions{});
    spec.output_dir = part;
    run_experiment(spec, RunOptions{});
    std::string rec = slurp(part / "records_ns.csv");
    const auto pos = rec.find('\n') + 3; // inside the first data row
    rec[pos] = rec[pos] == '1' ? '2' : '1';
    spit(part / "records_ns.csv", rec);
    const RunSummary s = run_experiment(spec, RunOptions{1, false, true, true});
    CHECK(s.trials_resumed == 0);
    CHECK(slurp(part / "records_ns.csv") == slurp(full / "records_ns.csv"));
}

TEST_CASE("timings flag fills the timing columns")
{
    const fs::path dir = scratch("timings");
    ExperimentSpec spec = small_spec(dir);
    spec.snr_sweep_db = {20.0};
    spec.trials = 1;
    run_experiment(spec, RunOptions{1, true, false, true});
    const auto lines = lines_of(slurp(dir / "records_ns.csv"));
    const RecordRow r = parse_record(lines[1]);
    CHECK(r.aes_ms > 0.0);
    CHECK(r.dde_ms > 0.0);
}

TEST_CASE("command line interface")
{
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    CHECK(run_cli("validate --config \"" + kDefaultConfig.string() + "\"") == 0);

    std::string bad = slurp(kDefaultConfig);
    bad.replace(bad.find("k = 32"), 6, "k = 30");
    spit(dir / "bad.cfg", bad);
    CHECK(run_cli("validate --config \"" + (dir / "bad.cfg").string() + "\"") == 2);
    CHECK(run_cli("run --config \"" + kDefaultConfig.string() + "\" --preset fig99 --out \"" + dir.string() + "\"") == 2);
    CHECK(run_cli("frobnicate") != 0);

    std::string small = slurp(kDefaultConfig);
    small.replace(small.find("g_d = 1024"), 10, "g_d = 128");
    small.replace(small.find("g_tau = 1024"), 12, "g_tau = 64");
    spit(dir / "small.cfg", small);
    const fs::path out = dir / "out";
    CHECK(run_cli("run --config \"" + (dir / "small.cfg").string() + "\" --snr 10,20 --trials 2 --seed 5 --beam ns,sinr "
                  "--workers 2 --quiet --out \"" + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "records_ns.csv"));
    CHECK(fs::exists(out / "records_sinr.csv"));
    const ExperimentSpec used = load_config(out / "run_config.cfg");
    CHECK(used.scenario.rng_seed == 5);
    CHECK(used.trials == 2);
    CHECK(used.snr_sweep_db == std::vector<double>{10.0, 20.0});

    CHECK(run_cli("oracle-check --instances 1 --grid 16") == 0);
}

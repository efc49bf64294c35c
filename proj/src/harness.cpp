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

#include "ulsense/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "ulsense/metrics.hpp"

namespace ulsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v)
{
    return std::isnan(v) ? std::string("NA") : format_double(v);
}

double parse_num(const std::string &s)
{
    if (s == "NA")
        return kNaN;
    return parse_double_list(s, "csv").at(0);
}

std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(line);
    while (std::getline(ss, item, ','))
        out.push_back(item);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double relative_delay(const PathSet &paths, int l)
{
    return paths.paths[l].delay - paths.los().delay;
}

} // namespace

std::vector<RecordRow> record_rows(const TrialResult &trial, const DesignOutcome *outcome, bool timings)
{
    std::vector<RecordRow> rows;
    const PathSet &truth = trial.truth;
    std::vector<double> true_aoa;
    for (const auto &p : truth.paths)
        true_aoa.push_back(p.aoa);
    const Assignment pairing =
        trial.aes_ok ? match_estimates(true_aoa, trial.aoa.angles) : Assignment{std::vector<int>(truth.size(), -1), 0.0};

    for (int l = 0; l < truth.size(); ++l) {
        const PathParams &p = truth.paths[l];
        RecordRow r;
        r.seed = trial.seed;
        r.snr_db = trial.snr_db;
        r.trial = trial.trial;
        r.path_idx = l;
        r.true_aoa_deg = rad2deg(p.aoa);
        r.true_doppler_hz = p.doppler;
        r.true_delay_s = relative_delay(truth, l);
        r.est_aoa_deg = r.est_doppler_hz = r.est_delay_s = kNaN;
        const int j = pairing.truth_to_est[l];
        r.matched = j >= 0;
        if (j >= 0) {
            const double angle = trial.aoa.angles[j];
            r.est_aoa_deg = rad2deg(angle);
            if (l > 0 && outcome && outcome->ok && angle != trial.aoa.los_angle) {
                // Triples follow the DDE target order, i.e. los_first() without the LoS entry.
                const std::vector<double> order = trial.aoa.los_first();
                const auto pos = std::find(order.begin() + 1, order.end(), angle) - order.begin() - 1;
                if (pos < static_cast<std::ptrdiff_t>(outcome->estimate.triples.size())) {
                    r.est_doppler_hz = outcome->estimate.triples[pos].doppler;
                    r.est_delay_s = outcome->estimate.triples[pos].rel_delay;
                }
            }
        }
        r.aes_ms = timings ? trial.aes_ms : kNaN;
        r.dde_ms = timings && outcome ? outcome->dde_ms : kNaN;
        rows.push_back(r);
    }
    return rows;
}

std::vector<GainRow> gain_rows(const TrialResult &trial, double hybrid_rho)
{
    std::vector<GainRow> rows;
    for (BeamDesign d :
         {BeamDesign::bartlett, BeamDesign::hybrid, BeamDesign::nullspace, BeamDesign::sinr, BeamDesign::mvdr}) {
        GainRow g;
        g.seed = trial.seed;
        g.snr_db = trial.snr_db;
        g.trial = trial.trial;
        g.beam_design = BeamChoice{d, hybrid_rho}.label();
        g.los_gain = trial.los_gain[static_cast<int>(d)];
        rows.push_back(g);
    }
    return rows;
}

std::string format_record(const RecordRow &r)
{
    std::string out = std::to_string(r.seed);
    for (const std::string &f :
         {num(r.snr_db), std::to_string(r.trial), std::to_string(r.path_idx), num(r.true_aoa_deg),
          num(r.true_doppler_hz), num(r.true_delay_s), num(r.est_aoa_deg), num(r.est_doppler_hz),
          num(r.est_delay_s), std::string(r.matched ? "1" : "0"), num(r.aes_ms), num(r.dde_ms)})
        out += "," + f;
    return out;
}

RecordRow parse_record(const std::string &line)
{
    const auto f = split_csv(line);
    if (f.size() != 13)
        throw std::runtime_error("record row must have 13 fields: " + line);
    RecordRow r;
    r.seed = std::stoull(f[0]);
    r.snr_db = parse_num(f[1]);
    r.trial = std::stoi(f[2]);
    r.path_idx = std::stoi(f[3]);
    r.true_aoa_deg = parse_num(f[4]);
    r.true_doppler_hz = parse_num(f[5]);
    r.true_delay_s = parse_num(f[6]);
    r.est_aoa_deg = parse_num(f[7]);
    r.est_doppler_hz = parse_num(f[8]);
    r.est_delay_s = parse_num(f[9]);
    r.matched = f[10] == "1";
    r.aes_ms = parse_num(f[11]);
    r.dde_ms = parse_num(f[12]);
    return r;
}

std::string format_gain(const GainRow &g)
{
    return std::to_string(g.seed) + "," + num(g.snr_db) + "," + std::to_string(g.trial) + "," + g.beam_design + "," +
           num(g.los_gain);
}

GainRow parse_gain(const std::string &line)
{
    const auto f = split_csv(line);
    if (f.size() != 5)
        throw std::runtime_error("gain row must have 5 fields: " + line);
    return {std::stoull(f[0]), parse_num(f[1]), std::stoi(f[2]), f[3], parse_num(f[4])};
}

std::uint64_t fnv1a64(const std::string &bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string block_checksum_line(const std::string &block_bytes)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "#fnv1a64=%016llx", static_cast<unsigned long long>(fnv1a64(block_bytes)));
    return buf;
}

namespace {

/// A CSV file made of a header and checksummed trial blocks.
struct BlockFile
{
    std::filesystem::path path;
    std::string header;
    std::vector<std::string> blocks; // each block: rows joined with '\n', trailing '\n'

    /// Number of leading intact blocks in an existing file (0 if absent or
    /// the header differs); fills `blocks` with them.
    int load_intact()
    {
        blocks.clear();
        std::ifstream in(path, std::ios::binary);
        if (!in)
            return 0;
        std::string line;
        if (!std::getline(in, line) || line != header)
            return 0;
        std::string pending;
        while (std::getline(in, line)) {
            if (!line.empty() && line[0] == '#') {
                if (line != block_checksum_line(pending))
                    break;
                blocks.push_back(pending);
                pending.clear();
            } else {
                pending += line + "\n";
            }
        }
        return static_cast<int>(blocks.size());
    }

    std::ofstream rewrite(int keep)
    {
        blocks.resize(static_cast<std::size_t>(keep));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        out << header << "\n";
        for (const auto &b : blocks)
            out << b << block_checksum_line(b) << "\n";
        out.flush();
        return out;
    }
};

void append_block(std::ofstream &out, const std::string &block)
{
    out << block << block_checksum_line(block) << "\n";
    out.flush();
}

template <typename Row, typename Parse>
std::vector<Row> parse_blocks(const std::vector<std::string> &blocks, Parse parse)
{
    std::vector<Row> rows;
    for (const auto &b : blocks) {
        std::istringstream in(b);
        std::string line;
        while (std::getline(in, line))
            rows.push_back(parse(line));
    }
    return rows;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

RunSummary run_experiment(const ExperimentSpec &spec, const RunOptions &opt)
{
    spec.validate();
    if (opt.workers < 1)
        throw ConfigError("workers", "must be at least 1");
    const auto &dir = spec.output_dir;
    std::filesystem::create_directories(dir);

    const std::string config_text = serialize_config(spec);
    const auto config_path = dir / "run_config.cfg";
    if (opt.resume && std::filesystem::exists(config_path) && read_text(config_path) != config_text)
        throw ConfigError("", "resume requested but " + config_path.string() + " describes a different run");
    write_text(config_path, config_text);

    std::vector<BlockFile> files;
    for (const BeamChoice &b : spec.beams)
        files.push_back({dir / ("records_" + b.file_tag() + ".csv"), kRecordHeader, {}});
    files.push_back({dir / "gains_trials.csv", kGainHeader, {}});

    const int total = static_cast<int>(spec.snr_sweep_db.size()) * spec.trials;
    int done = 0;
    if (opt.resume) {
        done = total;
        for (auto &f : files)
            done = std::min(done, f.load_intact());
    }
    std::vector<std::ofstream> streams;
    for (auto &f : files)
        streams.push_back(f.rewrite(done));

    RunSummary summary;
    summary.trials_total = total;
    summary.trials_resumed = done;

    TrialOptions trial_opt;
    trial_opt.beams = spec.beams;
    trial_opt.run_dde = spec.run_dde;

    std::mutex mu;
    std::condition_variable ready;
    std::vector<std::optional<TrialResult>> slots(static_cast<std::size_t>(total));
    std::atomic<int> next{done};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        for (;;) {
            const int j = next.fetch_add(1);
            if (j >= total || stop)
                return;
            const int snr_idx = j / spec.trials;
            const int trial = j % spec.trials;
            ScenarioConfig cfg = spec.scenario;
            cfg.snr_db = spec.snr_sweep_db[snr_idx];
            const std::uint64_t seed = derive_seed(spec.scenario.rng_seed, snr_idx, trial);
            TrialResult r = run_trial(cfg, seed, trial_opt);
            r.trial = trial;
            {
                std::lock_guard lock(mu);
                slots[j] = std::move(r);
            }
            ready.notify_all();
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < opt.workers; ++i)
        pool.emplace_back(worker);

    try {
        for (int j = done; j < total; ++j) {
            TrialResult r;
            {
                std::unique_lock lock(mu);
                ready.wait(lock, [&] { return slots[j].has_value(); });
                r = std::move(*slots[j]);
                slots[j].reset();
            }
            for (std::size_t d = 0; d < spec.beams.size(); ++d) {
                const DesignOutcome *outcome = d < r.dde.size() ? &r.dde[d] : nullptr;
                std::string block;
                for (const auto &row : record_rows(r, outcome, opt.timings))
                    block += format_record(row) + "\n";
                files[d].blocks.push_back(block);
                append_block(streams[d], block);
            }
            std::string gblock;
            for (const auto &row : gain_rows(r, spec.scenario.hybrid_rho))
                gblock += format_gain(row) + "\n";
            files.back().blocks.push_back(gblock);
            append_block(streams.back(), gblock);

            bool failed = !r.aes_ok;
            for (const auto &o : r.dde)
                failed = failed || !o.ok;
            summary.failed_trials += failed ? 1 : 0;
            if (!opt.quiet && (j + 1) % std::max(1, spec.trials / 4) == 0)
                std::cerr << "[ulsense] " << (j + 1) << "/" << total << " trials\n";
        }
    } catch (...) {
        stop = true;
        for (auto &t : pool)
            t.join();
        throw;
    }
    for (auto &t : pool)
        t.join();

    std::map<std::string, std::vector<RecordRow>> records;
    for (std::size_t d = 0; d < spec.beams.size(); ++d) {
        records[spec.beams[d].label()] = parse_blocks<RecordRow>(files[d].blocks, parse_record);
        summary.files.push_back(files[d].path);
    }
    const auto gains = parse_blocks<GainRow>(files.back().blocks, parse_gain);
    summary.files.push_back(files.back().path);
    emit_curves(records, gains, spec, dir);
    for (const char *name : {"nmse.csv", "ccdf.csv", "accuracy.csv", "gain.csv"})
        summary.files.push_back(dir / name);
    return summary;
}

namespace {

struct ParamView
{
    const char *name;
    double epsilon;     // native units
    double normaliser;  // native units per CCDF threshold unit
    bool nlos_only;
    double RecordRow::*truth;
    double RecordRow::*est;
};

} // namespace

void emit_curves(const std::map<std::string, std::vector<RecordRow>> &records, const std::vector<GainRow> &gains,
                 const ExperimentSpec &spec, const std::filesystem::path &dir)
{
    const ScenarioConfig &cfg = spec.scenario;
    const std::vector<ParamView> params{
        {"aoa", kAoaThresholdDeg, 1.0, false, &RecordRow::true_aoa_deg, &RecordRow::est_aoa_deg},
        {"doppler", doppler_threshold(cfg.f_max), 2.0 * cfg.f_max, true, &RecordRow::true_doppler_hz,
         &RecordRow::est_doppler_hz},
        {"delay", delay_threshold(cfg.t_s), cfg.tau_max, true, &RecordRow::true_delay_s, &RecordRow::est_delay_s},
    };

    std::ostringstream acc, nm, cc, gn;
    acc << "snr_db,parameter,beam_design,epsilon,accuracy,correct,total\n";
    nm << "snr_db,parameter,beam_design,nmse,pairs,missing\n";
    cc << "snr_db,parameter,beam_design,threshold,ccdf\n";
    gn << "snr_db,beam_design,mean_gain_db,p10_db,p25_db,p50_db,p75_db,p90_db,n\n";

    for (double snr : spec.snr_sweep_db) {
        for (const ParamView &pv : params) {
            const bool dd = std::string(pv.name) != "aoa";
            if (dd && !spec.run_dde)
                continue;
            for (const BeamChoice &beam : spec.beams) {
                const auto it = records.find(beam.label());
                if (it == records.end())
                    continue;
                std::vector<double> truth, est, errors;
                std::size_t missing = 0;
                for (const RecordRow &r : it->second) {
                    if (r.snr_db != snr || (pv.nlos_only && r.path_idx == 0))
                        continue;
                    const double e = r.*pv.est;
                    if (std::isnan(e)) {
                        ++missing;
                        continue;
                    }
                    truth.push_back(r.*pv.truth);
                    est.push_back(e);
                    errors.push_back(std::abs(e - r.*pv.truth));
                }
                const std::size_t total = errors.size() + missing;
                if (total == 0)
                    continue;
                const double accuracy = detection_accuracy(errors, pv.epsilon, missing);
                acc << num(snr) << "," << pv.name << "," << beam.label() << "," << num(pv.epsilon) << ","
                    << num(accuracy) << "," << std::llround(accuracy * static_cast<double>(total)) << "," << total
                    << "\n";
                const NmseResult n = nmse(truth, est);
                nm << num(snr) << "," << pv.name << "," << beam.label() << "," << (n.defined ? num(n.value) : "NA")
                   << "," << n.count << "," << missing << "\n";

                // Misses are infinite errors for the CCDF.
                std::vector<double> normalised;
                for (double e : errors)
                    normalised.push_back(e / pv.normaliser);
                normalised.insert(normalised.end(), missing, std::numeric_limits<double>::infinity());
                std::vector<double> thresholds;
                const double top = dd ? 1e-2 : 10.0;
                for (int i = 0; i <= 40; ++i)
                    thresholds.push_back(top * i / 40.0);
                const auto curve = ccdf(normalised, thresholds);
                for (std::size_t i = 0; i < thresholds.size(); ++i)
                    cc << num(snr) << "," << pv.name << "," << beam.label() << "," << num(thresholds[i]) << ","
                       << num(curve[i]) << "\n";
            }
        }

        for (BeamDesign d :
             {BeamDesign::bartlett, BeamDesign::hybrid, BeamDesign::nullspace, BeamDesign::sinr, BeamDesign::mvdr}) {
            const std::string label = BeamChoice{d, cfg.hybrid_rho}.label();
            std::vector<double> lin, db;
            for (const GainRow &g : gains)
                if (g.snr_db == snr && g.beam_design == label && !std::isnan(g.los_gain)) {
                    lin.push_back(g.los_gain);
                    db.push_back(10.0 * std::log10(std::max(g.los_gain, 1e-300)));
                }
            gn << num(snr) << "," << label << ",";
            if (lin.empty()) {
                gn << "NA,NA,NA,NA,NA,NA,0\n";
                continue;
            }
            double mean = 0.0;
            for (double v : lin)
                mean += v;
            mean /= static_cast<double>(lin.size());
            gn << num(10.0 * std::log10(mean));
            const std::vector<double> ps{10.0, 25.0, 50.0, 75.0, 90.0};
            for (double v : percentiles(db, ps))
                gn << "," << num(v);
            gn << "," << lin.size() << "\n";
        }
    }
    write_text(dir / "accuracy.csv", acc.str());
    write_text(dir / "nmse.csv", nm.str());
    write_text(dir / "ccdf.csv", cc.str());
    write_text(dir / "gain.csv", gn.str());
}

} // namespace ulsense

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

#include "ulsense/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ulsense/fft.hpp"

namespace ulsense {

std::string to_string(BeamDesign d)
{
    switch (d) {
    case BeamDesign::bartlett: return "bartlett";
    case BeamDesign::nullspace: return "ns";
    case BeamDesign::hybrid: return "hybrid";
    case BeamDesign::sinr: return "sinr";
    case BeamDesign::mvdr: return "mvdr";
    }
    return "unknown";
}

BeamDesign beam_design_from_string(const std::string &s)
{
    if (s == "bartlett" || s == "bb")
        return BeamDesign::bartlett;
    if (s == "ns" || s == "nullspace")
        return BeamDesign::nullspace;
    if (s == "hybrid" || s == "hb")
        return BeamDesign::hybrid;
    if (s == "sinr")
        return BeamDesign::sinr;
    if (s == "mvdr")
        return BeamDesign::mvdr;
    throw ConfigError("beam_design", "unknown beam design '" + s + "'");
}

double ScenarioConfig::noise_sigma() const
{
    return std::pow(10.0, -snr_db / 20.0);
}

namespace {

bool close_rel(double a, double b, double tol = 1e-9)
{
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

void require(bool ok, const char *key, const std::string &what)
{
    if (!ok)
        throw ConfigError(key, what);
}

} // namespace

void ScenarioConfig::validate() const
{
    require(n_r >= 4 && n_r % 2 == 0, "n_r", "must be even and at least 4");
    require(n_rf == 2, "n_rf", "only two subarrays are supported");
    require(f0 > 0.0, "f0", "must be positive");
    require(k >= 2 && k % 2 == 0, "k", "must be even and at least 2");
    require(delta_f > 0.0 && bandwidth > 0.0, "delta_f", "bandwidth and spacing must be positive");
    require(close_rel(delta_f * k, bandwidth), "k", "k * delta_f must equal the bandwidth");
    require(close_rel(t_s, 1.0 / delta_f), "t_s", "must equal 1 / delta_f");
    require(t_b > 0.0, "t_b", "must be positive");
    require(m_s >= n_r / 2, "m_s", "must be at least n_r / 2");
    require(m_c >= 1, "m_c", "must be positive");
    require(m_f >= m_c && m_f >= m_s, "m_f", "frame spacing must cover a whole frame");
    require(close_rel(t_f, m_f * t_s), "t_f", "must equal m_f * t_s");
    require(p >= 0, "p", "must be non-negative (0 selects automatically)");
    require(l_s >= 1, "l_s", "the LoS path is static, so l_s >= 1");
    require(l_d >= 0, "l_d", "must be non-negative");
    require(l_s + l_d <= 5, "l_d", "l_s + l_d must not exceed 5");
    require(k >= l_s + l_d, "k", "must be at least l_s + l_d");
    require(tau_max > 0.0 && tau_max <= t_s * (1.0 + 1e-12), "tau_max", "must lie in (0, t_s]");
    require(f_max > 0.0 && f_max <= (1.0 + 1e-12) / (2.0 * t_f), "f_max", "must lie in (0, 1 / (2 t_f)]");
    require(std::isfinite(snr_db), "snr_db", "must be finite");
    require(cfo_range >= 0.0, "cfo_range", "must be non-negative");
    require(to_range >= 0.0, "to_range", "must be non-negative");
    require(g_theta >= 16, "g_theta", "must be at least 16");
    require(is_power_of_two(g_d) && g_d >= n_r, "g_d", "must be a power of two and at least n_r");
    require(is_power_of_two(g_tau) && g_tau >= k / 2, "g_tau", "must be a power of two and at least k / 2");
    require(is_power_of_two(n_prime) && n_prime >= 8 * n_r, "n_prime", "must be a power of two and at least 8 n_r");
    require(min_aoa_separation_deg >= 0.0, "min_aoa_separation_deg", "must be non-negative");
    require(aoa_span_deg > 0.0 && aoa_span_deg < 90.0, "aoa_span_deg", "must lie in (0, 90)");
    require(nlos_gain_min_db <= nlos_gain_max_db, "nlos_gain_min_db", "must not exceed nlos_gain_max_db");
    require(nlos_gain_max_db <= -3.0, "nlos_gain_max_db",
            "NLoS paths must stay at least 3 dB below LoS");
    require(beam_subcarrier >= 0 && beam_subcarrier < k, "beam_subcarrier", "must index a subcarrier");
    require(hybrid_rho >= 0.0 && hybrid_rho <= 1.0, "hybrid_rho", "must lie in [0, 1]");
    require(ratio_floor >= 0.0 && ratio_floor < 1.0, "ratio_floor", "must lie in [0, 1)");
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(trim(item));
    return out;
}

double to_double(const std::string &v, const std::string &key)
{
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return out;
}

template <typename Int>
Int to_integer(const std::string &v, const std::string &key)
{
    Int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string &v, const std::string &key)
{
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

struct Field
{
    std::function<std::string(const ExperimentSpec &)> get;
    std::function<void(ExperimentSpec &, const std::string &)> set;
};

#define ULS_REAL(name)                                                                              \
    {                                                                                               \
        #name, Field{[](const ExperimentSpec &e) { return format_double(e.scenario.name); },        \
                     [](ExperimentSpec &e, const std::string &v) { e.scenario.name = to_double(v, #name); } } \
    }
#define ULS_INT(name)                                                                               \
    {                                                                                               \
        #name, Field{[](const ExperimentSpec &e) { return std::to_string(e.scenario.name); },       \
                     [](ExperimentSpec &e, const std::string &v) { e.scenario.name = to_integer<int>(v, #name); } } \
    }
#define ULS_BOOL(name)                                                                              \
    {                                                                                               \
        #name, Field{[](const ExperimentSpec &e) { return std::string(e.scenario.name ? "true" : "false"); }, \
                     [](ExperimentSpec &e, const std::string &v) { e.scenario.name = to_bool(v, #name); } } \
    }

const std::map<std::string, Field> &fields()
{
    static const std::map<std::string, Field> table{
        ULS_INT(n_r),
        ULS_INT(n_rf),
        ULS_REAL(f0),
        ULS_REAL(bandwidth),
        ULS_INT(k),
        ULS_REAL(delta_f),
        ULS_REAL(t_s),
        ULS_REAL(t_b),
        ULS_INT(m_s),
        ULS_INT(m_c),
        ULS_INT(m_f),
        ULS_REAL(t_f),
        ULS_INT(p),
        ULS_INT(l_s),
        ULS_INT(l_d),
        ULS_REAL(tau_max),
        ULS_REAL(f_max),
        ULS_REAL(snr_db),
        ULS_REAL(cfo_range),
        ULS_REAL(to_range),
        ULS_INT(g_theta),
        ULS_INT(g_d),
        ULS_INT(g_tau),
        ULS_INT(n_prime),
        {"rng_seed", Field{[](const ExperimentSpec &e) { return std::to_string(e.scenario.rng_seed); },
                           [](ExperimentSpec &e, const std::string &v) {
                               e.scenario.rng_seed = to_integer<std::uint64_t>(v, "rng_seed");
                           }}},
        ULS_REAL(min_aoa_separation_deg),
        ULS_REAL(aoa_span_deg),
        ULS_REAL(nlos_gain_min_db),
        ULS_REAL(nlos_gain_max_db),
        {"clock_mode", Field{[](const ExperimentSpec &e) {
                                 return std::string(e.scenario.clock_mode == ClockMode::per_frame ? "per_frame"
                                                                                                  : "constant_run");
                             },
                             [](ExperimentSpec &e, const std::string &v) {
                                 if (v == "per_frame")
                                     e.scenario.clock_mode = ClockMode::per_frame;
                                 else if (v == "constant_run")
                                     e.scenario.clock_mode = ClockMode::constant_run;
                                 else
                                     throw ConfigError("clock_mode", "expected per_frame or constant_run");
                             }}},
        ULS_INT(beam_subcarrier),
        ULS_REAL(hybrid_rho),
        ULS_REAL(ratio_floor),
        ULS_BOOL(dd_refine),
        ULS_BOOL(dd_aoa_refine),
        {"snr_sweep_db", Field{[](const ExperimentSpec &e) {
                                   std::string out;
                                   for (double v : e.snr_sweep_db)
                                       out += (out.empty() ? "" : ",") + format_double(v);
                                   return out;
                               },
                               [](ExperimentSpec &e, const std::string &v) {
                                   e.snr_sweep_db = parse_double_list(v, "snr_sweep_db");
                               }}},
        {"trials", Field{[](const ExperimentSpec &e) { return std::to_string(e.trials); },
                         [](ExperimentSpec &e, const std::string &v) { e.trials = to_integer<int>(v, "trials"); }}},
        {"beam_design", Field{[](const ExperimentSpec &e) {
                                  std::string out;
                                  for (const auto &b : e.beams)
                                      out += (out.empty() ? "" : ",") + b.label();
                                  return out;
                              },
                              [](ExperimentSpec &e, const std::string &v) {
                                  e.beams.clear();
                                  for (const auto &item : split(v, ','))
                                      e.beams.push_back(BeamChoice::parse(item));
                              }}},
        {"run_dde", Field{[](const ExperimentSpec &e) { return std::string(e.run_dde ? "true" : "false"); },
                          [](ExperimentSpec &e, const std::string &v) { e.run_dde = to_bool(v, "run_dde"); }}},
        {"preset", Field{[](const ExperimentSpec &e) { return e.preset; },
                         [](ExperimentSpec &e, const std::string &v) { e.preset = v; }}},
        {"output_dir", Field{[](const ExperimentSpec &e) { return e.output_dir.string(); },
                             [](ExperimentSpec &e, const std::string &v) { e.output_dir = v; }}},
    };
    return table;
}

#undef ULS_REAL
#undef ULS_INT
#undef ULS_BOOL

std::vector<double> sweep(double from, double to, double step)
{
    std::vector<double> out;
    for (int i = 0; from + i * step <= to + 1e-9; ++i)
        out.push_back(from + i * step);
    return out;
}

std::vector<BeamChoice> all_beams(double rho)
{
    return {{BeamDesign::bartlett, rho}, {BeamDesign::hybrid, rho}, {BeamDesign::nullspace, rho},
            {BeamDesign::sinr, rho},     {BeamDesign::mvdr, rho}};
}

} // namespace

std::string BeamChoice::label() const
{
    if (design == BeamDesign::hybrid)
        return "hybrid:" + format_double(rho);
    return to_string(design);
}

std::string BeamChoice::file_tag() const
{
    std::string out = label();
    for (char &c : out)
        if (c == ':')
            c = '_';
    return out;
}

BeamChoice BeamChoice::parse(const std::string &text)
{
    BeamChoice b;
    const auto colon = text.find(':');
    b.design = beam_design_from_string(trim(text.substr(0, colon)));
    if (colon != std::string::npos) {
        if (b.design != BeamDesign::hybrid)
            throw ConfigError("beam_design", "only the hybrid design takes a parameter");
        b.rho = to_double(trim(text.substr(colon + 1)), "beam_design");
        if (b.rho < 0.0 || b.rho > 1.0)
            throw ConfigError("beam_design", "hybrid rho must lie in [0, 1]");
    }
    return b;
}

void ExperimentSpec::validate() const
{
    scenario.validate();
    require(trials >= 1, "trials", "must be at least 1");
    require(!snr_sweep_db.empty(), "snr_sweep_db", "must list at least one SNR");
    require(!beams.empty(), "beam_design", "must list at least one design");
    std::set<std::string> seen;
    for (const auto &b : beams)
        require(seen.insert(b.label()).second, "beam_design", "duplicate design " + b.label());
    require(output_dir.string().find('\n') == std::string::npos, "output_dir", "invalid path");
}

bool ExperimentSpec::operator==(const ExperimentSpec &other) const
{
    return serialize_config(*this) == serialize_config(other);
}

std::vector<std::string> preset_names()
{
    return {"fig4", "fig5", "fig6", "fig6-desk", "fig7"};
}

void apply_preset(ExperimentSpec &spec, const std::string &name)
{
    if (name == "fig4") {
        spec.snr_sweep_db = sweep(-10.0, 20.0, 2.0);
        spec.trials = 100;
        spec.beams = {BeamChoice{BeamDesign::nullspace, spec.scenario.hybrid_rho}};
        spec.run_dde = false;
    } else if (name == "fig5") {
        spec.snr_sweep_db = {2.0, 18.0};
        spec.trials = 200;
        spec.beams = all_beams(spec.scenario.hybrid_rho);
        spec.run_dde = true;
    } else if (name == "fig6" || name == "fig6-desk") {
        spec.snr_sweep_db = sweep(-10.0, 20.0, 2.0);
        spec.trials = 200;
        spec.beams = {BeamChoice{BeamDesign::nullspace, spec.scenario.hybrid_rho}};
        spec.run_dde = true;
    } else if (name == "fig7") {
        spec.snr_sweep_db = sweep(-10.0, 20.0, 2.0);
        spec.trials = 100;
        spec.beams = all_beams(spec.scenario.hybrid_rho);
        spec.run_dde = false;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    spec.preset = name;
}

std::vector<double> parse_double_list(const std::string &text, const std::string &key)
{
    std::vector<double> out;
    for (const auto &item : split(text, ',')) {
        if (item.empty())
            throw ConfigError(key, "empty list entry");
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(to_double(item, key));
            continue;
        }
        // from:to:step range
        const auto parts = split(item, ':');
        if (parts.size() != 3)
            throw ConfigError(key, "ranges are written from:to:step");
        const double step = to_double(parts[2], key);
        if (!(step > 0.0))
            throw ConfigError(key, "range step must be positive");
        for (double v : sweep(to_double(parts[0], key), to_double(parts[1], key), step))
            out.push_back(v);
    }
    return out;
}

ExperimentSpec parse_config(const std::string &text)
{
    std::vector<std::pair<std::string, std::string>> entries;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!fields().count(key))
            throw ConfigError(key, "unknown key");
        if (!seen.insert(key).second)
            throw ConfigError(key, "duplicate key");
        entries.emplace_back(std::move(key), std::move(value));
    }

    ExperimentSpec spec;
    for (const auto &[key, value] : entries)
        if (key == "hybrid_rho")
            fields().at(key).set(spec, value);
    for (const auto &[key, value] : entries)
        if (key == "preset" && !value.empty())
            apply_preset(spec, value);
    for (const auto &[key, value] : entries)
        fields().at(key).set(spec, value);
    spec.validate();
    return spec;
}

ExperimentSpec load_config(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentSpec &spec)
{
    std::string out;
    for (const auto &[key, field] : fields())
        out += key + " = " + field.get(spec) + "\n";
    return out;
}

} // namespace ulsense

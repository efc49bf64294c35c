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

#include "ulsense/ddest.hpp"

#include <algorithm>
#include <cmath>

#include "ulsense/aoa.hpp"
#include "ulsense/array.hpp"
#include "ulsense/fft.hpp"
#include "ulsense/linalg.hpp"

namespace ulsense {

CFrameOutputs::CFrameOutputs(int frames, int symbols, int subcarriers)
    : b_(frames), m_(symbols), k_(subcarriers)
{
    if (frames < 1 || symbols < 1 || subcarriers < 1)
        throw ContractError("CFrameOutputs: all dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(frames) * symbols * subcarriers;
    ys_.assign(n, cplx(0.0));
    yc_.assign(n, cplx(0.0));
}

std::size_t CFrameOutputs::index(int b, int m, int k) const
{
    if (b < 0 || b >= b_ || m < 0 || m >= m_ || k < 0 || k >= k_)
        throw ContractError("CFrameOutputs: index out of range");
    return (static_cast<std::size_t>(b) * m_ + m) * k_ + k;
}

cplx signal_ratio(cplx y_s, cplx y_c)
{
    if (y_c == cplx(0.0))
        throw ContractError("signal_ratio: reference sample is zero");
    return y_s / y_c;
}

std::optional<RatioSnapshot> build_dd_snapshot(const CFrameOutputs &out, double ratio_floor)
{
    const int n_b = out.frames();
    const int n_m = out.symbols();
    const int n_k = out.subcarriers();
    if (n_k < 2 || n_k % 2 != 0)
        throw ContractError("build_dd_snapshot: subcarrier count must be even");
    const int kt = n_k / 2;

    RatioSnapshot s;
    s.n_r = n_b;
    s.k_tilde = kt;
    CMat averaged(n_k, n_b); // (subcarrier, frame)
    std::vector<double> mags(static_cast<std::size_t>(n_m) * n_k);
    for (int b = 0; b < n_b; ++b) {
        for (int m = 0; m < n_m; ++m)
            for (int k = 0; k < n_k; ++k)
                mags[static_cast<std::size_t>(m) * n_k + k] = std::abs(out.yc(b, m, k));
        std::vector<double> sorted = mags;
        const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
        std::nth_element(sorted.begin(), mid, sorted.end());
        const double threshold = ratio_floor * *mid;

        int invalid = 0;
        for (int k = 0; k < n_k; ++k) {
            cplx sum = 0.0;
            int count = 0;
            for (int m = 0; m < n_m; ++m) {
                const double mag = mags[static_cast<std::size_t>(m) * n_k + k];
                if (mag < threshold || mag == 0.0) {
                    ++invalid;
                    continue;
                }
                sum += signal_ratio(out.ys(b, m, k), out.yc(b, m, k));
                ++count;
            }
            averaged(k, b) = count > 0 ? sum / static_cast<double>(count) : cplx(0.0);
        }
        s.invalid_samples += invalid;
        if (4 * invalid > n_m * n_k)
            return std::nullopt;
    }

    s.xi_bar.resize(kt);
    for (int k0 = 0; k0 < kt; ++k0) {
        CVec xi(static_cast<Eigen::Index>(n_b) * kt);
        for (int b = 0; b < n_b; ++b)
            xi.segment(static_cast<Eigen::Index>(b) * kt, kt) = averaged.col(b).segment(k0, kt);
        s.xi_bar[k0] = std::move(xi);
    }
    return s;
}

CMat smoothed_covariance_dd(const RatioSnapshot &s)
{
    if (s.xi_bar.empty())
        throw ContractError("smoothed_covariance_dd: empty snapshot");
    const Eigen::Index dim = s.xi_bar.front().size();
    CMat stacked(dim, static_cast<Eigen::Index>(s.xi_bar.size()));
    for (std::size_t i = 0; i < s.xi_bar.size(); ++i)
        stacked.col(i) = s.xi_bar[i];
    return hermitian_part(stacked * stacked.adjoint() / static_cast<double>(s.xi_bar.size()));
}

CVec dd_basis_angle_doppler(double theta, double f, int n_r, double t_f)
{
    CVec b1 = beamspace_response(Codebook(n_r), theta);
    for (int b = 0; b < n_r; ++b)
        b1[b] *= cis_cycles(b * f * t_f);
    return b1;
}

CVec dd_basis_delay(double tau, int k_tilde, double delta_f)
{
    CVec b2(k_tilde);
    for (int r = 0; r < k_tilde; ++r)
        b2[r] = cis_cycles(-tau * r * delta_f);
    return b2;
}

CVec dd_basis(double theta, double f, double tau, int n_r, int k_tilde, double t_f, double delta_f)
{
    const CVec b1 = dd_basis_angle_doppler(theta, f, n_r, t_f);
    const CVec b2 = dd_basis_delay(tau, k_tilde, delta_f);
    CVec bd(static_cast<Eigen::Index>(n_r) * k_tilde);
    for (int b = 0; b < n_r; ++b)
        bd.segment(static_cast<Eigen::Index>(b) * k_tilde, k_tilde) = b1[b] * b2;
    return bd;
}

double dd_grid_doppler(int g, int g_d, double t_f)
{
    return static_cast<double>(g) / (g_d * t_f) - 1.0 / (2.0 * t_f);
}

double dd_grid_delay(int g, int g_tau, double delta_f)
{
    return static_cast<double>(g) / (g_tau * delta_f);
}

namespace {

void check_grid(int n_r, int k_tilde, const DdSearchOptions &opt)
{
    if (!is_power_of_two(opt.g_d) || !is_power_of_two(opt.g_tau))
        throw ContractError("ab2fm: grid sizes must be powers of two");
    if (opt.g_d < n_r || opt.g_tau < k_tilde)
        throw ContractError("ab2fm: grids must be at least N_r x K~");
}

double spectrum_value(double dim, double captured)
{
    return 1.0 / std::max(dim - captured, 1e-16 * dim);
}

} // namespace

RMat ab2fm_spectrum(const CMat &signal_basis, double theta, int n_r, int k_tilde, const DdSearchOptions &opt)
{
    check_grid(n_r, k_tilde, opt);
    const Eigen::Index dim = static_cast<Eigen::Index>(n_r) * k_tilde;
    if (signal_basis.rows() != dim)
        throw ContractError("ab2fm_spectrum: basis rows must equal N_r K~");

    const CVec c = beamspace_response(Codebook(n_r), theta);
    RMat captured = RMat::Zero(opt.g_tau, opt.g_d);
    CMat u_tilde(k_tilde, n_r);
    for (Eigen::Index i = 0; i < signal_basis.cols(); ++i) {
        for (int b = 0; b < n_r; ++b) {
            const cplx weight = (b % 2 == 0 ? 1.0 : -1.0) * std::conj(c[b]);
            u_tilde.col(b) = weight * signal_basis.col(i).segment(static_cast<Eigen::Index>(b) * k_tilde, k_tilde);
        }
        captured += fft2_padded(u_tilde, opt.g_tau, opt.g_d).cwiseAbs2();
    }

    RMat p(opt.g_tau, opt.g_d);
    const double total = static_cast<double>(dim);
    for (int gt = 0; gt < opt.g_tau; ++gt) {
        const int row = (opt.g_tau - gt) % opt.g_tau;
        for (int gd = 0; gd < opt.g_d; ++gd)
            p(gt, gd) = spectrum_value(total, captured(row, gd));
    }
    return p;
}

RMat music3d_oracle(const CMat &noise_basis, double theta, std::span<const double> f_grid,
                    std::span<const double> tau_grid, int n_r, int k_tilde, double t_f, double delta_f)
{
    const Eigen::Index dim = static_cast<Eigen::Index>(n_r) * k_tilde;
    if (noise_basis.rows() != dim)
        throw ContractError("music3d_oracle: basis rows must equal N_r K~");
    RMat p(static_cast<Eigen::Index>(tau_grid.size()), static_cast<Eigen::Index>(f_grid.size()));
    CMat delay_basis(k_tilde, static_cast<Eigen::Index>(tau_grid.size()));
    for (std::size_t i = 0; i < tau_grid.size(); ++i)
        delay_basis.col(i) = dd_basis_delay(tau_grid[i], k_tilde, delta_f);

    CMat block(dim, delay_basis.cols());
    for (std::size_t j = 0; j < f_grid.size(); ++j) {
        const CVec b1 = dd_basis_angle_doppler(theta, f_grid[j], n_r, t_f);
        for (int b = 0; b < n_r; ++b)
            block.middleRows(static_cast<Eigen::Index>(b) * k_tilde, k_tilde) = b1[b] * delay_basis;
        const CMat proj = noise_basis.adjoint() * block;
        for (Eigen::Index i = 0; i < proj.cols(); ++i)
            p(i, static_cast<Eigen::Index>(j)) = 1.0 / std::max(proj.col(i).squaredNorm(), 1e-16 * dim);
    }
    return p;
}

double ab2fm_oracle_deviation(const RatioSnapshot &s, double theta, int l, int g, double t_f, double delta_f)
{
    const SubspaceDecomposition sub = decompose(smoothed_covariance_dd(s), l);
    DdSearchOptions opt;
    opt.g_d = g;
    opt.g_tau = g;
    opt.t_f = t_f;
    opt.delta_f = delta_f;
    const RMat fast = ab2fm_spectrum(sub.signal_basis, theta, s.n_r, s.k_tilde, opt);
    std::vector<double> f_grid(g), tau_grid(g);
    for (int i = 0; i < g; ++i) {
        f_grid[i] = dd_grid_doppler(i, g, t_f);
        tau_grid[i] = dd_grid_delay(i, g, delta_f);
    }
    const RMat direct = music3d_oracle(sub.noise_basis, theta, f_grid, tau_grid, s.n_r, s.k_tilde, t_f, delta_f);
    return ((fast - direct).array().abs() / direct.array().abs()).maxCoeff();
}

namespace {

struct Peak
{
    double value;
    double doppler;
    double delay;
};

double wrap_into(double x, double lo, double period)
{
    return x - period * std::floor((x - lo) / period);
}

Peak locate_peak(const RMat &p, const DdSearchOptions &opt)
{
    Eigen::Index gt = 0, gd = 0;
    const double value = p.maxCoeff(&gt, &gd);
    double dt = 0.0, dd = 0.0;
    if (opt.parabolic_refine) {
        const auto lp = [&](Eigen::Index r, Eigen::Index c) {
            return std::log(p((r + p.rows()) % p.rows(), (c + p.cols()) % p.cols()));
        };
        dt = parabolic_offset(lp(gt - 1, gd), lp(gt, gd), lp(gt + 1, gd));
        dd = parabolic_offset(lp(gt, gd - 1), lp(gt, gd), lp(gt, gd + 1));
    }
    const double period_f = 1.0 / opt.t_f;
    const double period_tau = 1.0 / opt.delta_f;
    const double f = wrap_into(dd_grid_doppler(0, opt.g_d, opt.t_f) + (gd + dd) * period_f / opt.g_d,
                               -0.5 * period_f, period_f);
    const double tau = wrap_into((gt + dt) * period_tau / opt.g_tau, 0.0, period_tau);
    return {value, f, tau};
}

} // namespace

DdEstimate ab2fm(const RatioSnapshot &s, std::span<const double> targets, double los_angle, int l,
                 const DdSearchOptions &opt)
{
    DdEstimate est;
    est.los_angle = los_angle;
    if (targets.empty())
        return est;
    const int dim = s.n_r * s.k_tilde;
    if (l < 1 || l >= dim)
        throw ContractError("ab2fm: signal dimension must lie in [1, N_r K~)");
    check_grid(s.n_r, s.k_tilde, opt);

    const SubspaceDecomposition sub = decompose(smoothed_covariance_dd(s), l);
    for (double theta : targets) {
        DdTriple best{theta, 0.0, 0.0};
        double best_value = -1.0;
        const int steps = opt.aoa_refine ? 4 : 0;
        for (int i = -steps; i <= steps; ++i) {
            const double candidate = theta + deg2rad(0.25 * i);
            if (std::abs(candidate) >= 0.5 * kPi)
                continue;
            const Peak peak = locate_peak(ab2fm_spectrum(sub.signal_basis, candidate, s.n_r, s.k_tilde, opt), opt);
            if (peak.value > best_value) {
                best_value = peak.value;
                best = {candidate, peak.doppler, peak.delay};
            }
        }
        est.triples.push_back(best);
    }
    return est;
}

std::pair<std::vector<DdTriple>, std::vector<DdTriple>> classify_paths(const DdEstimate &est,
                                                                       double doppler_threshold)
{
    std::pair<std::vector<DdTriple>, std::vector<DdTriple>> out;
    for (const DdTriple &t : est.triples)
        (std::abs(t.doppler) <= doppler_threshold ? out.first : out.second).push_back(t);
    return out;
}

} // namespace ulsense

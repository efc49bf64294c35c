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

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ulsense/types.hpp"

namespace ulsense {

using RMat = Eigen::MatrixXd;

/// Two-port C-frame outputs of one DD-snapshot: y_c (reference beam) and y_s
/// (scanning beam b) per frame b, symbol m and subcarrier k.
class CFrameOutputs
{
public:
    CFrameOutputs(int frames, int symbols, int subcarriers);

    cplx &ys(int b, int m, int k) { return ys_[index(b, m, k)]; }
    cplx &yc(int b, int m, int k) { return yc_[index(b, m, k)]; }
    cplx ys(int b, int m, int k) const { return ys_[index(b, m, k)]; }
    cplx yc(int b, int m, int k) const { return yc_[index(b, m, k)]; }

    int frames() const { return b_; }
    int symbols() const { return m_; }
    int subcarriers() const { return k_; }

private:
    std::size_t index(int b, int m, int k) const;

    int b_, m_, k_;
    std::vector<cplx> ys_, yc_;
};

/// Frame-averaged snapshot vectors xi_bar_k for k = 0..K~-1. Entry b*K~ + r
/// of xi_bar_k is the averaged ratio of frame b at subcarrier k + r.
struct RatioSnapshot
{
    std::vector<CVec> xi_bar;
    int n_r = 0;
    int k_tilde = 0;
    int invalid_samples = 0;
};

struct DdTriple
{
    double aoa = 0.0;       // rad
    double doppler = 0.0;   // Hz
    double rel_delay = 0.0; // s, relative to the LoS path
};

struct DdEstimate
{
    std::vector<DdTriple> triples;
    double los_angle = 0.0;
};

/// Grid and refinement options for the joint Doppler-delay search.
struct DdSearchOptions
{
    int g_d = 1024;
    int g_tau = 1024;
    double t_f = 327.68e-6;
    double delta_f = 3.125e6;
    bool parabolic_refine = false;
    bool aoa_refine = false;
};

/// y_s / y_c. Throws ContractError if y_c is exactly zero.
cplx signal_ratio(cplx y_s, cplx y_c);

/// Computes the ratios with the validity rule |y_c| >= floor * median|y_c|
/// (per frame), frame-averages over valid symbols and stacks the K~ = K/2
/// snapshot vectors. Returns nullopt when any frame has more than 25 % of
/// its samples invalid.
std::optional<RatioSnapshot> build_dd_snapshot(const CFrameOutputs &out, double ratio_floor);

/// (1/K~) sum_k xi_bar_k xi_bar_k^H.
CMat smoothed_covariance_dd(const RatioSnapshot &s);

/// Doppler basis b_0(f) scaled element-wise by W_s^H a(theta).
CVec dd_basis_angle_doppler(double theta, double f, int n_r, double t_f);
/// Delay basis [1, e^{-j 2 pi tau df}, ...] of length K~.
CVec dd_basis_delay(double tau, int k_tilde, double delta_f);
/// b_1 kron b_2, squared norm N_r K~.
CVec dd_basis(double theta, double f, double tau, int n_r, int k_tilde, double t_f, double delta_f);

/// Doppler and delay of grid cell (g_D, g_tau).
double dd_grid_doppler(int g, int g_d, double t_f);
double dd_grid_delay(int g, int g_tau, double delta_f);

/// Signal-subspace spectrum at a fixed angle, evaluated with a zero-padded
/// 2D FFT. Entry (g_tau, g_D) corresponds to dd_grid_delay / dd_grid_doppler.
RMat ab2fm_spectrum(const CMat &signal_basis, double theta, int n_r, int k_tilde, const DdSearchOptions &opt);

/// Direct noise-subspace spectrum 1/||b_D^H U_n||^2; entry (i, j) for
/// tau_grid[i], f_grid[j].
RMat music3d_oracle(const CMat &noise_basis, double theta, std::span<const double> f_grid,
                    std::span<const double> tau_grid, int n_r, int k_tilde, double t_f, double delta_f);

/// Largest relative deviation between ab2fm_spectrum and music3d_oracle at
/// one angle, on a g x g grid (the Doppler and delay grids of ab2fm_spectrum
/// with g_d = g_tau = g).
double ab2fm_oracle_deviation(const RatioSnapshot &s, double theta, int l, int g, double t_f, double delta_f);

/// Joint Doppler-delay estimation at each target angle, using an L-dimensional
/// signal subspace of the smoothed covariance. An empty target list gives an
/// empty estimate.
DdEstimate ab2fm(const RatioSnapshot &s, std::span<const double> targets, double los_angle, int l,
                 const DdSearchOptions &opt);

/// Splits paths into (static, dynamic) by |doppler| <= threshold.
std::pair<std::vector<DdTriple>, std::vector<DdTriple>> classify_paths(const DdEstimate &est,
                                                                       double doppler_threshold);

} // namespace ulsense

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

#include "ulsense/aoa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ulsense/fft.hpp"

namespace ulsense {

AesRawOutputs::AesRawOutputs(int snapshots, int slots, int subcarriers)
    : p_(snapshots), m_(slots), k_(subcarriers),
      y_(static_cast<std::size_t>(snapshots) * slots * subcarriers, CVec::Zero(2))
{
    if (snapshots < 1 || slots < 1 || subcarriers < 1)
        throw ContractError("AesRawOutputs: all dimensions must be positive");
}

std::size_t AesRawOutputs::index(int p, int m, int k) const
{
    if (p < 0 || p >= p_ || m < 0 || m >= m_ || k < 0 || k >= k_)
        throw ContractError("AesRawOutputs: index out of range");
    return (static_cast<std::size_t>(p) * m_ + m) * k_ + k;
}

std::vector<double> AoaEstimate::los_first() const
{
    std::vector<double> out{los_angle};
    for (double a : angles)
        if (a != los_angle)
            out.push_back(a);
    return out;
}

AesSnapshotSet stack_aes_snapshots(const AesRawOutputs &raw, int n_r)
{
    if (2 * raw.slots() != n_r)
        throw ContractError("stack_aes_snapshots: 2 * BS-TS count must equal n_r");
    AesSnapshotSet s;
    s.snapshots = raw.snapshots();
    s.subcarriers = raw.subcarriers();
    s.data.resize(n_r, static_cast<Eigen::Index>(s.snapshots) * s.subcarriers);
    for (int p = 0; p < s.snapshots; ++p)
        for (int k = 0; k < s.subcarriers; ++k)
            for (int m = 0; m < raw.slots(); ++m) {
                const CVec &y = raw.at(p, m, k);
                if (y.size() != 2)
                    throw ContractError("stack_aes_snapshots: each BS-TS output must have 2 entries");
                s.data(2 * m, p * s.subcarriers + k) = y[0];
                s.data(2 * m + 1, p * s.subcarriers + k) = y[1];
            }
    return s;
}

CMat smoothed_covariance_aes(const AesSnapshotSet &s)
{
    const double scale = 1.0 / static_cast<double>(s.data.cols());
    return hermitian_part(scale * s.data * s.data.adjoint());
}

CMat subcarrier_covariance_aes(const AesSnapshotSet &s, int k)
{
    CMat r = CMat::Zero(s.n_r(), s.n_r());
    for (int p = 0; p < s.snapshots; ++p)
        r += s.slice(p, k) * s.slice(p, k).adjoint();
    return hermitian_part(r / static_cast<double>(s.snapshots));
}

std::vector<double> aoa_grid(int g)
{
    std::vector<double> grid(g);
    for (int i = 0; i < g; ++i)
        grid[i] = std::asin(-1.0 + (i + 0.5) * 2.0 / g);
    return grid;
}

RVec music_spectrum_aoa(const CMat &cov, int l, const Codebook &codebook, const std::vector<double> &theta_grid)
{
    const int n = codebook.size();
    if (cov.rows() != n || cov.cols() != n)
        throw ContractError("music_spectrum_aoa: covariance must be n_r x n_r");
    if (l < 0 || l >= n)
        throw ContractError("music_spectrum_aoa: path count must be below n_r");

    const SubspaceDecomposition sub = decompose(cov, l);
    CMat candidates(n, static_cast<Eigen::Index>(theta_grid.size()));
    for (std::size_t g = 0; g < theta_grid.size(); ++g)
        candidates.col(g) = steering_vector(theta_grid[g], n);
    candidates = codebook.stacked().adjoint() * candidates;

    const CMat proj = sub.signal_basis.adjoint() * candidates;
    RVec spectrum(candidates.cols());
    for (Eigen::Index g = 0; g < candidates.cols(); ++g) {
        const double total = candidates.col(g).squaredNorm();
        const double denom = std::max(total - proj.col(g).squaredNorm(), 1e-16 * total);
        spectrum[g] = 1.0 / denom;
    }
    return spectrum;
}

std::vector<int> largest_peaks(const RVec &spectrum, int count)
{
    const int g = static_cast<int>(spectrum.size());
    std::vector<int> peaks;
    for (int i = 0; i < g; ++i) {
        const double left = spectrum[(i + g - 1) % g];
        const double right = spectrum[(i + 1) % g];
        if (spectrum[i] > left && spectrum[i] >= right)
            peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) { return spectrum[a] > spectrum[b]; });
    if (static_cast<int>(peaks.size()) > count)
        peaks.resize(count);
    return peaks;
}

double parabolic_offset(double left, double centre, double right)
{
    const double curvature = left - 2.0 * centre + right;
    if (curvature >= 0.0)
        return 0.0;
    return std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
}

AoaSearchResult estimate_aoas(const AesSnapshotSet &s, int l, const ScenarioConfig &cfg)
{
    if (l < 1 || l > 5)
        throw ContractError("estimate_aoas: path count must be in [1, 5]");
    const Codebook codebook(s.n_r());
    const int g = cfg.g_theta;
    const RVec spectrum = music_spectrum_aoa(smoothed_covariance_aes(s), l, codebook, aoa_grid(g));
    const RVec log_spec = spectrum.array().log();

    AoaSearchResult out;
    for (int idx : largest_peaks(spectrum, l)) {
        const double delta =
            parabolic_offset(log_spec[(idx + g - 1) % g], log_spec[idx], log_spec[(idx + 1) % g]);
        double u = -1.0 + (idx + 0.5 + delta) * 2.0 / g;
        u = std::clamp(u, -1.0 + 1e-12, 1.0 - 1e-12);
        out.angles.push_back(std::asin(u));
    }
    std::sort(out.angles.begin(), out.angles.end());
    out.ok = static_cast<int>(out.angles.size()) == l;
    return out;
}

double los_scan_sine(int q, int n_prime)
{
    double u = -2.0 * q / n_prime;
    while (u < -1.0)
        u += 2.0;
    return u;
}

RVec los_scan_power(const AesSnapshotSet &s, const Codebook &codebook, int n_prime)
{
    const int n = codebook.size();
    if (n_prime < n)
        throw ContractError("los_scan_power: FFT length shorter than the array");
    const CMat virtual_array = codebook.stacked() * s.data;
    RVec power = RVec::Zero(n_prime);
    const double scale = 1.0 / n; // w(theta) = a(theta)/sqrt(N)
    for (Eigen::Index c = 0; c < virtual_array.cols(); ++c)
        power += scale * fft_padded(virtual_array.col(c), n_prime).cwiseAbs2();
    return power;
}

double detect_los(const AesSnapshotSet &s, const std::vector<double> &angles, const ScenarioConfig &cfg)
{
    if (angles.empty())
        throw ContractError("detect_los: angle list is empty");
    if (angles.size() == 1)
        return angles.front();
    const Codebook codebook(s.n_r());
    const RVec power = los_scan_power(s, codebook, cfg.n_prime);
    Eigen::Index best = 0;
    power.maxCoeff(&best);
    const double scan_angle = std::asin(los_scan_sine(static_cast<int>(best), cfg.n_prime));

    auto sorted = angles;
    std::sort(sorted.begin(), sorted.end());
    double pick = sorted.front();
    for (double a : sorted)
        if (std::abs(a - scan_angle) < std::abs(pick - scan_angle))
            pick = a;
    return pick;
}

} // namespace ulsense

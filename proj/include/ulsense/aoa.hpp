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

#include <vector>

#include "ulsense/array.hpp"
#include "ulsense/linalg.hpp"
#include "ulsense/types.hpp"

namespace ulsense {

/// Raw two-port outputs of the scan, one 2-vector per (snapshot p, BS-TS m,
/// subcarrier k).
class AesRawOutputs
{
public:
    AesRawOutputs(int snapshots, int slots, int subcarriers);

    CVec &at(int p, int m, int k) { return y_[index(p, m, k)]; }
    const CVec &at(int p, int m, int k) const { return y_[index(p, m, k)]; }

    int snapshots() const { return p_; }
    int slots() const { return m_; }
    int subcarriers() const { return k_; }

private:
    std::size_t index(int p, int m, int k) const;

    int p_, m_, k_;
    std::vector<CVec> y_;
};

/// Stacked virtual-array measurements. Column p*K + k holds the length-N_r
/// vector built from one S-frame at subcarrier k.
struct AesSnapshotSet
{
    CMat data;
    int snapshots = 0;
    int subcarriers = 0;

    int n_r() const { return static_cast<int>(data.rows()); }
    auto slice(int p, int k) const { return data.col(p * subcarriers + k); }
};

struct AoaEstimate
{
    std::vector<double> angles; // ascending
    double los_angle = 0.0;

    /// LoS angle first, then the remaining angles in ascending order.
    std::vector<double> los_first() const;
};

struct AoaSearchResult
{
    bool ok = false;              // false when fewer than L peaks exist
    std::vector<double> angles;   // ascending, the peaks that were found
};

/// Concatenates the 2-port outputs of BS-TS m = 0..M_s-1 into length-N_r
/// vectors in codebook order. Requires 2 * slots == n_r.
AesSnapshotSet stack_aes_snapshots(const AesRawOutputs &raw, int n_r);

/// Frequency-smoothed covariance (1/(PK)) sum_{p,k} s s^H.
CMat smoothed_covariance_aes(const AesSnapshotSet &s);

/// Single-subcarrier covariance (1/P) sum_p s_{p,k} s_{p,k}^H.
CMat subcarrier_covariance_aes(const AesSnapshotSet &s, int k);

/// G angles uniform in sin(theta) over [-1, 1), cell-centred so every
/// point lies strictly inside (-pi/2, pi/2).
std::vector<double> aoa_grid(int g);

/// MUSIC pseudo-spectrum 1/||p^H U_n||^2 with p = W_s^H a(theta), evaluated
/// through the L-dimensional signal subspace.
RVec music_spectrum_aoa(const CMat &cov, int l, const Codebook &codebook, const std::vector<double> &theta_grid);

/// Indices of the `count` largest strict local maxima of a circular
/// spectrum, by descending value (ties to lower index). May return fewer.
std::vector<int> largest_peaks(const RVec &spectrum, int count);

/// Vertex offset in (-0.5, 0.5) of the parabola through three samples.
double parabolic_offset(double left, double centre, double right);

/// Algorithm steps 3-7: smoothed covariance, MUSIC over G_theta sine grid,
/// L largest peaks, 3-point parabolic refinement.
AoaSearchResult estimate_aoas(const AesSnapshotSet &s, int l, const ScenarioConfig &cfg);

/// Array-response power of the reconstructed virtual array over an N'-point
/// zero-padded FFT grid, summed over all (p, k). Entry q corresponds to
/// spatial sine los_scan_sine(q, N').
RVec los_scan_power(const AesSnapshotSet &s, const Codebook &codebook, int n_prime);

double los_scan_sine(int q, int n_prime);

/// Algorithm steps 8-10: strongest array-response direction, matched to
/// the nearest member of `angles` (ties to the smaller angle).
double detect_los(const AesSnapshotSet &s, const std::vector<double> &angles, const ScenarioConfig &cfg);

} // namespace ulsense

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

#include <span>
#include <vector>

#include "ulsense/types.hpp"

namespace ulsense {

/// A unit-norm receive beam and the design that produced it.
struct BeamVector
{
    CVec weights;
    BeamDesign design = BeamDesign::bartlett;
    double rho = 1.0; // only meaningful for the hybrid design

    /// |w^H a(theta)|^2.
    double gain_towards(double theta) const;
};

/// Steering matrix of the given angles.
CMat steering_columns(std::span<const double> angles, int n_r);

/// LS path gains pinv(A) r for A = [a(theta_0) ...]. Throws ContractError
/// when A is rank deficient.
CVec estimate_gains_ls(std::span<const double> angles, const CVec &virtual_snapshot);

/// Mean of the n - L smallest eigenvalues of a covariance.
double estimate_noise_power(const CMat &cov, int l);

/// Noise power from a single snapshot's rank-one sample covariance.
double estimate_noise_power(const CVec &virtual_snapshot, int l);

/// a(theta_0)/sqrt(N); angles[0] is the LoS angle.
BeamVector bartlett(std::span<const double> angles, int n_r);

/// Maximises w^H R w inside the null space of the NLoS steering vectors,
/// R being the sample covariance of `virtual_snapshots` (columns). With one
/// snapshot this is the projection of r onto the null space.
BeamVector nullspace_beam(std::span<const double> angles, const CMat &virtual_snapshots);

/// sqrt(rho) w_BB + e^{-j phi} sqrt(1 - rho) w_NS, phases aligned at the LoS
/// angle, renormalised.
BeamVector hybrid_beam(std::span<const double> angles, const CMat &virtual_snapshots, double rho);

/// Interference-plus-noise covariance R_N = A_N B_N A_N^H + sigma^2 I with
/// B_N the NLoS gain second-moment matrix.
CMat interference_covariance(std::span<const double> angles, const CMat &gain_moment, double noise_power, int n_r);

/// Gain second moment (1/P) sum_p beta_p beta_p^H from per-snapshot gains
/// (one column per snapshot).
CMat gain_moment(const CMat &gains);

/// Dominant generalised eigenvector of (R_0, R_N), R_0 = |beta_0|^2 a a^H.
/// Diagonal loading 1e-10 trace(R_N)/N applied before inversion.
BeamVector sinr_beam(std::span<const double> angles, const CMat &gain_moment, double noise_power, int n_r);
BeamVector sinr_beam(std::span<const double> angles, const CVec &gains, double noise_power, int n_r);

/// R^{-1} a(theta_los), normalised; diagonally loaded if R is not PD.
BeamVector mvdr_beam(const CMat &cov, double los_angle);

/// Generalised Rayleigh quotient w^H R_0 w / w^H R_N w.
double rayleigh_quotient(const CVec &w, const CMat &r0, const CMat &rn);

/// Signal covariance of the LoS path from the gain second moment.
CMat los_covariance(std::span<const double> angles, const CMat &gain_moment, int n_r);

} // namespace ulsense

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

#include "ulsense/beams.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "ulsense/array.hpp"
#include "ulsense/linalg.hpp"

namespace ulsense {

namespace {

void require_los(std::span<const double> angles)
{
    if (angles.empty())
        throw ContractError("beam design: the LoS angle is required");
}

CVec unit(const CVec &w)
{
    const double n = w.norm();
    if (!(n > 0.0))
        throw ContractError("beam design: degenerate (zero) beam");
    return w / n;
}

CMat loaded(const CMat &r)
{
    const double eps = 1e-10 * r.trace().real() / static_cast<double>(r.rows());
    return r + eps * CMat::Identity(r.rows(), r.cols());
}

} // namespace

double BeamVector::gain_towards(double theta) const
{
    return std::norm(weights.dot(steering_vector(theta, static_cast<int>(weights.size()))));
}

CMat steering_columns(std::span<const double> angles, int n_r)
{
    CMat a(n_r, static_cast<Eigen::Index>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i)
        a.col(i) = steering_vector(angles[i], n_r);
    return a;
}

CVec estimate_gains_ls(std::span<const double> angles, const CVec &virtual_snapshot)
{
    const int n = static_cast<int>(virtual_snapshot.size());
    if (static_cast<int>(angles.size()) > n)
        throw ContractError("estimate_gains_ls: more paths than antennas");
    const CMat a = steering_columns(angles, n);
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVec &sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-10 * sv[0])
        throw ContractError("estimate_gains_ls: steering matrix is rank deficient (duplicate angles?)");
    return svd.solve(virtual_snapshot);
}

double estimate_noise_power(const CMat &cov, int l)
{
    const int n = static_cast<int>(cov.rows());
    if (l < 0 || l >= n)
        throw ContractError("estimate_noise_power: path count must be below the dimension");
    const RVec ev = hermitian_eigenvalues(cov);
    return ev.tail(n - l).mean();
}

double estimate_noise_power(const CVec &virtual_snapshot, int l)
{
    return estimate_noise_power(CMat(virtual_snapshot * virtual_snapshot.adjoint()), l);
}

BeamVector bartlett(std::span<const double> angles, int n_r)
{
    require_los(angles);
    return {steering_vector(angles[0], n_r) / std::sqrt(static_cast<double>(n_r)), BeamDesign::bartlett, 1.0};
}

BeamVector nullspace_beam(std::span<const double> angles, const CMat &virtual_snapshots)
{
    require_los(angles);
    const int n = static_cast<int>(virtual_snapshots.rows());
    if (static_cast<int>(angles.size()) - 1 >= n)
        throw ContractError("nullspace_beam: no null space left for the NLoS constraints");

    const CMat psi = orthogonal_complement(steering_columns(angles.subspan(1), n));
    const CMat projected = psi.adjoint() * virtual_snapshots;
    CVec alpha;
    if (projected.cols() == 1) {
        alpha = projected.col(0);
    } else {
        const SubspaceDecomposition sub = decompose(projected * projected.adjoint(), 1);
        alpha = sub.signal_basis.col(0);
    }
    if (alpha.norm() <= 1e-300) // received energy vanishes in the null space
        alpha = psi.adjoint() * steering_vector(angles[0], n);
    return {unit(psi * alpha), BeamDesign::nullspace, 0.0};
}

BeamVector hybrid_beam(std::span<const double> angles, const CMat &virtual_snapshots, double rho)
{
    if (rho < 0.0 || rho > 1.0)
        throw ContractError("hybrid_beam: rho must lie in [0, 1]");
    const int n = static_cast<int>(virtual_snapshots.rows());
    const BeamVector bb = bartlett(angles, n);
    const BeamVector ns = nullspace_beam(angles, virtual_snapshots);
    // e^{-j phi} w_NS has a real positive response at the LoS angle, like w_BB.
    const cplx ns_resp = ns.weights.dot(steering_vector(angles[0], n));
    const cplx rotation = std::abs(ns_resp) > 0.0 ? std::conj(ns_resp) / std::abs(ns_resp) : cplx(1.0);
    const CVec w = std::sqrt(rho) * bb.weights + std::sqrt(1.0 - rho) * std::conj(rotation) * ns.weights;
    return {unit(w), BeamDesign::hybrid, rho};
}

CMat gain_moment(const CMat &gains)
{
    return hermitian_part(gains * gains.adjoint() / static_cast<double>(gains.cols()));
}

CMat interference_covariance(std::span<const double> angles, const CMat &moment, double noise_power, int n_r)
{
    require_los(angles);
    const Eigen::Index l = static_cast<Eigen::Index>(angles.size());
    if (moment.rows() != l || moment.cols() != l)
        throw ContractError("interference_covariance: gain moment must be L x L");
    if (noise_power < 0.0)
        throw ContractError("interference_covariance: noise power must be non-negative");
    CMat r = noise_power * CMat::Identity(n_r, n_r);
    if (l > 1) {
        const CMat a_n = steering_columns(angles.subspan(1), n_r);
        r += a_n * moment.bottomRightCorner(l - 1, l - 1) * a_n.adjoint();
    }
    return hermitian_part(r);
}

CMat los_covariance(std::span<const double> angles, const CMat &moment, int n_r)
{
    require_los(angles);
    if (moment.rows() < 1 || moment.rows() != moment.cols())
        throw ContractError("los_covariance: gain moment must be square");
    const CVec a0 = steering_vector(angles[0], n_r);
    return moment(0, 0).real() * a0 * a0.adjoint();
}

BeamVector sinr_beam(std::span<const double> angles, const CMat &moment, double noise_power, int n_r)
{
    const CMat rn = loaded(interference_covariance(angles, moment, noise_power, n_r));
    // R_0 is rank one along a0, so the dominant generalised eigenvector is R_N^{-1} a0.
    Eigen::LDLT<CMat> ldlt(rn);
    if (ldlt.info() != Eigen::Success)
        throw ContractError("sinr_beam: interference covariance is not positive definite");
    const CVec w = ldlt.solve(steering_vector(angles[0], n_r));
    return {unit(w), BeamDesign::sinr, 0.0};
}

BeamVector sinr_beam(std::span<const double> angles, const CVec &gains, double noise_power, int n_r)
{
    if (gains.size() != static_cast<Eigen::Index>(angles.size()))
        throw ContractError("sinr_beam: one gain per angle is required");
    return sinr_beam(angles, CMat(gains * gains.adjoint()), noise_power, n_r);
}

BeamVector mvdr_beam(const CMat &cov, double los_angle)
{
    const int n = static_cast<int>(cov.rows());
    if (cov.cols() != n || n < 1)
        throw ContractError("mvdr_beam: covariance must be square");
    const CVec a0 = steering_vector(los_angle, n);
    Eigen::LLT<CMat> llt(hermitian_part(cov));
    if (llt.info() != Eigen::Success)
        llt.compute(loaded(hermitian_part(cov)));
    if (llt.info() != Eigen::Success)
        throw ContractError("mvdr_beam: covariance is not positive semidefinite");
    return {unit(llt.solve(a0)), BeamDesign::mvdr, 0.0};
}

double rayleigh_quotient(const CVec &w, const CMat &r0, const CMat &rn)
{
    const double den = w.dot(rn * w).real();
    if (!(den > 0.0))
        throw ContractError("rayleigh_quotient: denominator must be positive");
    return w.dot(r0 * w).real() / den;
}

} // namespace ulsense

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

#include "ulsense/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ulsense {

SubspaceDecomposition decompose(const CMat &cov, int signal_dim)
{
    const auto n = cov.rows();
    if (cov.cols() != n)
        throw ContractError("decompose: covariance must be square");
    if (signal_dim < 0 || signal_dim > n)
        throw ContractError("decompose: signal dimension out of range");

    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(cov));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("decompose: eigendecomposition did not converge");

    // Eigen returns ascending order; flip to descending.
    SubspaceDecomposition out;
    out.eigenvalues = es.eigenvalues().reverse();
    const CMat vecs = es.eigenvectors().rowwise().reverse();
    out.signal_basis = vecs.leftCols(signal_dim);
    out.noise_basis = vecs.rightCols(n - signal_dim);
    return out;
}

RVec hermitian_eigenvalues(const CMat &cov)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(cov), Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

CMat orthogonal_complement(const CMat &columns, double rel_tol)
{
    const auto n = columns.rows();
    if (columns.cols() == 0)
        return CMat::Identity(n, n);
    Eigen::JacobiSVD<CMat> svd(columns, Eigen::ComputeFullU);
    const RVec &sv = svd.singularValues();
    const double tol = rel_tol * (sv.size() > 0 ? sv[0] : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > tol)
        ++rank;
    return svd.matrixU().rightCols(n - rank);
}

CMat hermitian_part(const CMat &m)
{
    return 0.5 * (m + m.adjoint());
}

} // namespace ulsense

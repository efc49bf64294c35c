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

#include "ulsense/types.hpp"

namespace ulsense {

/// Eigen-split of a Hermitian covariance into signal and noise subspaces.
struct SubspaceDecomposition
{
    CMat signal_basis; // dim x L
    CMat noise_basis;  // dim x (dim - L)
    RVec eigenvalues;  // descending

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Full Hermitian eigendecomposition, eigenvalues sorted descending, with
/// the leading `signal_dim` eigenvectors as the signal subspace.
SubspaceDecomposition decompose(const CMat &cov, int signal_dim);

/// Eigenvalues of a Hermitian matrix, descending.
RVec hermitian_eigenvalues(const CMat &cov);

/// Orthonormal basis of the orthogonal complement of span(columns), rank
/// decided with tolerance rel_tol * largest singular value.
CMat orthogonal_complement(const CMat &columns, double rel_tol = 1e-10);

/// 0.5 (M + M^H).
CMat hermitian_part(const CMat &m);

} // namespace ulsense

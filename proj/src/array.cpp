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

#include "ulsense/array.hpp"

#include <cmath>

namespace ulsense {

CVec steering_vector_sine(double u, int n_r)
{
    CVec a(n_r);
    for (int n = 0; n < n_r; ++n)
        a[n] = cis_cycles(-0.5 * n * u);
    return a;
}

CVec steering_vector(double theta, int n_r)
{
    return steering_vector_sine(std::sin(theta), n_r);
}

Codebook::Codebook(int n_r) : n_r_(n_r), ws_(n_r, n_r)
{
    if (n_r < 2 || n_r % 2 != 0)
        throw ContractError("Codebook: n_r must be even and >= 2");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_r));
    for (int b = 0; b < n_r; ++b)
        for (int n = 0; n < n_r; ++n)
            ws_(n, b) = scale * cis_cycles(-static_cast<double>(n) * b / n_r);
}

double Codebook::beam_sine(int b) const
{
    double u = 2.0 * b / n_r_;
    if (u >= 1.0)
        u -= 2.0;
    return u;
}

double Codebook::beam_angle(int b) const
{
    return std::asin(beam_sine(b));
}

CMat BeamMatrix::as_matrix() const
{
    CMat w(w_a.size(), 2);
    w.col(0) = w_a;
    w.col(1) = w_b;
    return w;
}

Codebook build_codebook(int n_r)
{
    return Codebook(n_r);
}

BeamMatrix scanning_beam_pair(const Codebook &codebook, int m)
{
    if (m < 0 || 2 * m + 1 >= codebook.size())
        throw ContractError("scanning_beam_pair: BS-TS index out of range");
    return {codebook.column(2 * m), codebook.column(2 * m + 1)};
}

CVec reconstruct_virtual_array(const CVec &snapshot, const Codebook &codebook)
{
    if (snapshot.size() != codebook.size())
        throw ContractError("reconstruct_virtual_array: snapshot length must equal n_r");
    return codebook.stacked() * snapshot;
}

CVec beamspace_response(const Codebook &codebook, double theta)
{
    return codebook.stacked().adjoint() * steering_vector(theta, codebook.size());
}

} // namespace ulsense

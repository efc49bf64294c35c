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

/// Half-wavelength ULA response, entry n = e^{-j pi n sin(theta)}.
/// Unnormalised, norm sqrt(n_r).
CVec steering_vector(double theta, int n_r);

/// Same response parameterised by the spatial sine u = sin(theta); valid
/// for any real u (aliases with period 2).
CVec steering_vector_sine(double u, int n_r);

/// DFT scanning codebook. Column b is e^{-j 2 pi n b / N}/sqrt(N), the
/// normalised steering vector of spatial sine 2b/N folded into [-1, 1).
class Codebook
{
public:
    explicit Codebook(int n_r);

    int size() const { return n_r_; }
    const CMat &stacked() const { return ws_; }
    CVec column(int b) const { return ws_.col(b); }

    /// Spatial sine covered by beam b, in [-1, 1).
    double beam_sine(int b) const;
    /// Reporting-only angle label of beam b.
    double beam_angle(int b) const;

private:
    int n_r_;
    CMat ws_;
};

/// Two beams held during one beam-switching timeslot.
struct BeamMatrix
{
    CVec w_a;
    CVec w_b;

    CMat as_matrix() const;
};

Codebook build_codebook(int n_r);

/// W_m = [w_2m, w_2m+1]; throws ContractError for m outside [0, N/2).
BeamMatrix scanning_beam_pair(const Codebook &codebook, int m);

/// Full-array vector W_s * snapshot, exact up to the common clock phase.
CVec reconstruct_virtual_array(const CVec &snapshot, const Codebook &codebook);

/// Candidate vector W_s^H a(theta) seen through the stacked beams.
CVec beamspace_response(const Codebook &codebook, double theta);

} // namespace ulsense

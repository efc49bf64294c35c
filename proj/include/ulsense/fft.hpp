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

/// Forward DFT X[q] = sum_n x[n] e^{-j 2 pi n q / len}, input zero-padded
/// to `len`. Backed by FFTW.
CVec fft_padded(const CVec &x, int len);

/// Forward 2D DFT of a rows x cols matrix zero-padded to out_rows x
/// out_cols: X[p, q] = sum_{r,c} x[r, c] e^{-j2pi(r p/out_rows + c q/out_cols)}.
CMat fft2_padded(const CMat &x, int out_rows, int out_cols);

bool is_power_of_two(int n);

} // namespace ulsense

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

#include "ulsense/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace ulsense {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}

class InPlacePlan
{
public:
    InPlacePlan(cplx *data, int n0, int n1)
    {
        std::lock_guard lock(planner_mutex());
        auto *buf = reinterpret_cast<fftw_complex *>(data);
        plan_ = n1 > 0 ? fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE)
                       : fftw_plan_dft_1d(n0, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan_)
            throw std::runtime_error("fftw planning failed");
    }
    ~InPlacePlan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    InPlacePlan(const InPlacePlan &) = delete;
    InPlacePlan &operator=(const InPlacePlan &) = delete;

    void execute() { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

} // namespace

bool is_power_of_two(int n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

CVec fft_padded(const CVec &x, int len)
{
    if (len < x.size())
        throw ContractError("fft_padded: transform length shorter than input");
    CVec buf = CVec::Zero(len);
    InPlacePlan plan(buf.data(), len, 0);
    buf.head(x.size()) = x;
    plan.execute();
    return buf;
}

CMat fft2_padded(const CMat &x, int out_rows, int out_cols)
{
    if (out_rows < x.rows() || out_cols < x.cols())
        throw ContractError("fft2_padded: transform size smaller than input");
    CMat buf = CMat::Zero(out_rows, out_cols);
    // Column-major storage is the row-major layout of the transpose; the 2D
    // DFT is separable so planning (cols, rows) gives the same result.
    InPlacePlan plan(buf.data(), out_cols, out_rows);
    buf.topLeftCorner(x.rows(), x.cols()) = x;
    plan.execute();
    return buf;
}

} // namespace ulsense

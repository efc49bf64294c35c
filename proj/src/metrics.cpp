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

#include "ulsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ulsense {

int Assignment::matched() const
{
    return static_cast<int>(std::count_if(truth_to_est.begin(), truth_to_est.end(), [](int j) { return j >= 0; }));
}

namespace {

// Rows <= cols. Returns the column assigned to each row.
std::vector<int> hungarian(const std::vector<std::vector<double>> &cost)
{
    const int n = static_cast<int>(cost.size());
    const int m = n > 0 ? static_cast<int>(cost[0].size()) : 0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> owner(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        owner[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = owner[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j])
                    continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const int j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (owner[j] > 0)
            row_to_col[owner[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace

Assignment match_estimates(std::span<const double> truth, std::span<const double> est)
{
    Assignment out;
    out.truth_to_est.assign(truth.size(), -1);
    if (truth.empty() || est.empty())
        return out;
    const bool transpose = truth.size() > est.size();
    const auto rows = transpose ? est : truth;
    const auto cols = transpose ? truth : est;
    std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            cost[i][j] = std::abs(rows[i] - cols[j]);
    const std::vector<int> pick = hungarian(cost);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int j = pick[i];
        if (j < 0)
            continue;
        if (transpose)
            out.truth_to_est[j] = static_cast<int>(i);
        else
            out.truth_to_est[i] = j;
        out.cost += cost[i][j];
    }
    return out;
}

NmseResult nmse(std::span<const double> truth, std::span<const double> est)
{
    NmseResult r;
    if (truth.size() != est.size() || truth.empty())
        return r;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        num += (est[i] - truth[i]) * (est[i] - truth[i]);
        den += truth[i] * truth[i];
    }
    r.count = truth.size();
    if (!(den > 0.0))
        return r;
    r.defined = true;
    r.value = num / den;
    return r;
}

std::vector<double> ccdf(std::span<const double> errors, std::span<const double> thresholds)
{
    if (errors.empty())
        throw ContractError("ccdf: error sample is empty");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double x : thresholds) {
        const auto at_or_below = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        out.push_back(1.0 - static_cast<double>(at_or_below) / static_cast<double>(sorted.size()));
    }
    return out;
}

double detection_accuracy(std::span<const double> errors, double epsilon, std::size_t misses)
{
    const std::size_t total = errors.size() + misses;
    if (total == 0)
        throw ContractError("detection_accuracy: no outcomes");
    const auto hits = std::count_if(errors.begin(), errors.end(), [&](double e) { return std::abs(e) <= epsilon; });
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> percentiles(std::span<const double> values, std::span<const double> ps)
{
    if (values.empty())
        throw ContractError("percentiles: sample is empty");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    for (double p : ps) {
        if (p < 0.0 || p > 100.0)
            throw ContractError("percentiles: p must lie in [0, 100]");
        const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        out.push_back(sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    }
    return out;
}

double doppler_to_velocity(double doppler_hz, double f0)
{
    return std::abs(doppler_hz) * kSpeedOfLight / f0;
}

double delay_to_distance(double delay_s)
{
    return std::abs(delay_s) * kSpeedOfLight;
}

} // namespace ulsense

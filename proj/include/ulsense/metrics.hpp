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

/// One-to-one pairing of truths to estimates.
struct Assignment
{
    std::vector<int> truth_to_est; // -1 where the truth is unmatched
    double cost = 0.0;             // sum of |truth - est| over the pairs

    int matched() const;
};

/// Minimum-total-cost assignment on |truth_i - est_j| (Hungarian method).
/// min(#truth, #est) pairs are formed.
Assignment match_estimates(std::span<const double> truth, std::span<const double> est);

struct NmseResult
{
    bool defined = false;
    double value = 0.0;
    std::size_t count = 0;
};

/// sum |est - truth|^2 / sum |truth|^2; undefined for zero truth energy or
/// mismatched/empty input.
NmseResult nmse(std::span<const double> truth, std::span<const double> est);

/// C(x) = 1 - fraction(errors <= x) at each threshold.
std::vector<double> ccdf(std::span<const double> errors, std::span<const double> thresholds);

/// Fraction of |error| <= epsilon among errors.size() + misses outcomes.
double detection_accuracy(std::span<const double> errors, double epsilon, std::size_t misses = 0);

/// Linear-interpolated percentiles (p in [0, 100]) of a nonempty sample.
std::vector<double> percentiles(std::span<const double> values, std::span<const double> ps);

/// |delta f_D| * c / f0 in m/s.
double doppler_to_velocity(double doppler_hz, double f0);
/// |delta tau| * c in m.
double delay_to_distance(double delay_s);

inline constexpr double kAoaThresholdDeg = 3.0;
/// 1e-3 of the full Doppler span 2 f_max.
inline double doppler_threshold(double f_max) { return 2e-3 * f_max; }
/// 1e-3 of the symbol duration.
inline double delay_threshold(double t_s) { return 1e-3 * t_s; }

} // namespace ulsense

// Copyright 2026 The TIER Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TIER_METRICS_HPP_
#define TIER_METRICS_HPP_

// Evaluation criteria for predicted quality scores: Spearman rank-order
// correlation (SRCC) and Pearson linear correlation (PLCC).
//
// All functions are pure. Inputs must be finite; correlations additionally
// need N >= 2 and non-constant inputs, otherwise UndefinedCorrelation is
// thrown instead of producing NaN.

#include <cstddef>
#include <span>
#include <vector>

namespace tier::metrics {

struct CorrelationResult {
  double srcc = 0.0;
  double plcc = 0.0;
  std::size_t n = 0;
};

// Fractional ranks 1..N. Tied values share the mean of the ranks they span,
// so the ranks always sum to N(N+1)/2.
std::vector<double> rank_transform(std::span<const double> values);

// Pearson correlation of the average-rank vectors. When neither input has
// ties this is evaluated with the closed form 1 - 6*sum(d^2)/(N(N^2-1)).
double spearman_rcc(std::span<const double> truth, std::span<const double> pred);

// Mean-centered two-pass Pearson correlation accumulated in long double.
double pearson_lcc(std::span<const double> truth, std::span<const double> pred);

CorrelationResult correlate(std::span<const double> truth, std::span<const double> pred);

}  // namespace tier::metrics

#endif  // TIER_METRICS_HPP_

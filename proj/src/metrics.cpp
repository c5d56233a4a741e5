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

#include "tier/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tier/error.hpp"

namespace tier::metrics {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

void require_pair(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) {
    throw ValidationError("length mismatch: " + std::to_string(truth.size()) + " vs " +
                          std::to_string(pred.size()));
  }
  if (truth.size() < 2) {
    throw ValidationError("correlation needs at least 2 samples, got " + std::to_string(truth.size()));
  }
  require_finite(truth, "truth");
  require_finite(pred, "pred");
}

bool is_constant(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
}

struct Ranking {
  std::vector<double> ranks;
  bool has_ties = false;
};

Ranking rank_with_ties(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  Ranking out;
  out.ranks.resize(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    // Positions start..end-1 hold ranks start+1..end.
    const double avg = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) out.ranks[order[k]] = avg;
    if (end - start > 1) out.has_ties = true;
    start = end;
  }
  return out;
}

double clamp_unit(long double r) {
  return static_cast<double>(std::clamp(r, -1.0L, 1.0L));
}

double pearson_unchecked(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  long double mx = 0.0L;
  long double my = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<long double>(n);
  my /= static_cast<long double>(n);

  long double sxy = 0.0L;
  long double sxx = 0.0L;
  long double syy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = x[i] - mx;
    const long double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0L || syy == 0.0L) {
    throw UndefinedCorrelation("correlation undefined: input has zero variance");
  }
  return clamp_unit(sxy / std::sqrt(sxx * syy));
}

}  // namespace

std::vector<double> rank_transform(std::span<const double> values) {
  if (values.empty()) throw ValidationError("rank_transform: empty input");
  require_finite(values, "rank_transform");
  return rank_with_ties(values).ranks;
}

double spearman_rcc(std::span<const double> truth, std::span<const double> pred) {
  require_pair(truth, pred);
  if (is_constant(truth) || is_constant(pred)) {
    throw UndefinedCorrelation("SRCC undefined: constant input");
  }
  const Ranking rt = rank_with_ties(truth);
  const Ranking rp = rank_with_ties(pred);
  if (rt.has_ties || rp.has_ties) return pearson_unchecked(rt.ranks, rp.ranks);

  // Tie-free ranks are integers, so the squared differences sum exactly.
  const std::size_t n = truth.size();
  long double sum_d2 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(rt.ranks[i]) - rp.ranks[i];
    sum_d2 += d * d;
  }
  const long double nn = static_cast<long double>(n);
  return clamp_unit(1.0L - 6.0L * sum_d2 / (nn * (nn * nn - 1.0L)));
}

double pearson_lcc(std::span<const double> truth, std::span<const double> pred) {
  require_pair(truth, pred);
  return pearson_unchecked(truth, pred);
}

CorrelationResult correlate(std::span<const double> truth, std::span<const double> pred) {
  return {spearman_rcc(truth, pred), pearson_lcc(truth, pred), truth.size()};
}

}  // namespace tier::metrics

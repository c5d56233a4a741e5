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

#include "oracles.hpp"

#include <cmath>

namespace tier::testing {

std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0;
    double equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (v[j] == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double sx = 0;
  long double sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n;
  const long double my = sy / n;
  long double num = 0;
  long double dx2 = 0;
  long double dy2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx2 += (x[i] - mx) * (x[i] - mx);
    dy2 += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(num / std::sqrt(dx2 * dy2));
}

double closed_form_srcc(const std::vector<double>& truth, const std::vector<double>& pred) {
  const auto rt = naive_ranks(truth);
  const auto rp = naive_ranks(pred);
  double sum = 0;
  for (std::size_t i = 0; i < rt.size(); ++i) sum += (rt[i] - rp[i]) * (rt[i] - rp[i]);
  const double n = static_cast<double>(rt.size());
  return 1.0 - 6.0 * sum / (n * (n * n - 1.0));
}

double reference_head(const RegressionHead& head, const std::vector<double>& x) {
  const int h = head.hidden_dim();
  const int d = head.input_dim();
  double out = head.b2;
  for (int i = 0; i < h; ++i) {
    double acc = head.b1[i];
    for (int k = 0; k < d; ++k) acc += head.w1(i, k) * x[k];
    if (head.activation == Activation::kRelu && acc < 0) acc = 0;
    out += head.w2[i] * acc;
  }
  return out;
}

std::vector<double> central_differences(std::vector<ParamBlock> params, const std::function<double()>& f,
                                        double step) {
  std::vector<double> g;
  for (auto& block : params) {
    for (double& v : block.values) {
      const double saved = v;
      v = saved + step;
      const double up = f();
      v = saved - step;
      const double down = f();
      v = saved;
      g.push_back((up - down) / (2 * step));
    }
  }
  return g;
}

}  // namespace tier::testing

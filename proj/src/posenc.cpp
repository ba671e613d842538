// Copyright 2026 The lmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lmkit/posenc.hpp"

#include <cmath>
#include <limits>

namespace lmkit {

std::vector<double> alibi_slopes(int heads) {
  require(heads >= 1, Errc::index_out_of_range, "need at least one head");
  std::vector<double> slopes(static_cast<std::size_t>(heads));
  const double ratio = std::pow(2.0, -8.0 / heads);
  double m = 1.0;
  for (int h = 0; h < heads; ++h) {
    m *= ratio;
    slopes[static_cast<std::size_t>(h)] = m;
  }
  return slopes;
}

std::vector<double> alibi_bias(int i, double m) {
  std::vector<double> values(static_cast<std::size_t>(i));
  for (int j = 1; j <= i; ++j)
    values[static_cast<std::size_t>(j - 1)] = -m * static_cast<double>(i - j);
  return values;
}

std::vector<double> harmonic_bias(int i, double m) {
  std::vector<double> values(static_cast<std::size_t>(i));
  for (int j = 1; j <= i; ++j)
    values[static_cast<std::size_t>(j - 1)] =
        m * (-static_cast<double>(i - j)) /
        (static_cast<double>(j) * static_cast<double>(j + 1));
  return values;
}

double harmonic_factor_sum(int i) {
  // Kahan summation; the plain running sum can drift past 1e-12 at i ~ 1e4.
  double sum = 0.0, comp = 0.0;
  for (int k = 1; k <= i; ++k) {
    const double term =
        1.0 / (static_cast<double>(k) * static_cast<double>(k + 1));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

std::vector<double> rope_apply(std::span<const double> x, int pos,
                               double base) {
  require(x.size() % 2 == 0, Errc::odd_dimension,
          "RoPE requires an even head dimension");
  const double d = static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t * 2 < x.size(); ++t) {
    const double angle =
        static_cast<double>(pos) *
        std::pow(base, -2.0 * static_cast<double>(t) / d);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    out[2 * t] = x[2 * t] * c - x[2 * t + 1] * s;
    out[2 * t + 1] = x[2 * t] * s + x[2 * t + 1] * c;
  }
  return out;
}

Matrix factored_scores(const AttentionInputs& inputs,
                       const std::vector<double>& slopes, int head,
                       double base) {
  const Matrix& Q = inputs.Q;
  const Matrix& K = inputs.K;
  require(Q.rows() == K.rows() && Q.cols() == K.cols(), Errc::shape_mismatch,
          "Q and K must have identical shapes");
  require(head >= 0 && static_cast<std::size_t>(head) < slopes.size(),
          Errc::index_out_of_range, "head index out of range");
  const std::size_t len = Q.rows();
  const double slope = slopes[static_cast<std::size_t>(head)];
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(Q.cols()));

  Matrix rotated_q(len, Q.cols()), rotated_k(len, K.cols());
  for (std::size_t r = 0; r < len; ++r) {
    const auto rq = rope_apply(Q.row(r), static_cast<int>(r), base);
    const auto rk = rope_apply(K.row(r), static_cast<int>(r), base);
    for (std::size_t c = 0; c < Q.cols(); ++c) {
      rotated_q(r, c) = rq[c];
      rotated_k(r, c) = rk[c];
    }
  }

  Matrix weights(len, len);
  for (std::size_t i = 0; i < len; ++i) {
    const auto bias = harmonic_bias(static_cast<int>(i) + 1, slope);
    std::vector<double> scores(i + 1);
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= i; ++j) {
      scores[j] = dot(rotated_q.row(i), rotated_k.row(j)) * inv_sqrt_d +
                  bias[j];
      row_max = std::max(row_max, scores[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      scores[j] = std::exp(scores[j] - row_max);
      denom += scores[j];
    }
    for (std::size_t j = 0; j <= i; ++j) weights(i, j) = scores[j] / denom;
  }
  return weights;
}

}  // namespace lmkit

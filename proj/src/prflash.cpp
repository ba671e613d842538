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

#include "lmkit/prflash.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lmkit/rng.hpp"

namespace lmkit {
namespace {

void check_model(const BlockProbModel& model) {
  require(model.block_rows >= 1 && model.block_cols >= 1,
          Errc::shape_mismatch, "block sizes must be >= 1");
  require(model.context_len >= 1, Errc::shape_mismatch,
          "context length must be >= 1");
  require(model.cutoff < model.m_blocks(), Errc::distance_out_of_range,
          "cutoff k must be < M_blocks");
}

// Shared attention core. Queries and keys are given as lists of original
// row indices; `allowed` is evaluated on original indices so the masked and
// compacted paths perform bit-identical arithmetic on the surviving set.
Matrix attend_core(const Matrix& Q, const Matrix& K, const Matrix& V,
                   const std::vector<std::size_t>& q_rows,
                   const std::vector<std::size_t>& k_rows,
                   const std::function<bool(std::size_t, std::size_t)>& allowed) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
  Matrix out(q_rows.size(), V.cols());
  std::vector<double> scores(k_rows.size());
  std::vector<std::size_t> live(k_rows.size());
  for (std::size_t oi = 0; oi < q_rows.size(); ++oi) {
    const std::size_t i = q_rows[oi];
    std::size_t n_live = 0;
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t oj = 0; oj < k_rows.size(); ++oj) {
      const std::size_t j = k_rows[oj];
      if (!allowed(i, j)) continue;
      const double s = dot(Q.row(i), K.row(j)) * inv_sqrt_d;
      scores[n_live] = s;
      live[n_live] = oj;
      row_max = std::max(row_max, s);
      ++n_live;
    }
    double denom = 0.0;
    for (std::size_t t = 0; t < n_live; ++t) {
      scores[t] = std::exp(scores[t] - row_max);
      denom += scores[t];
    }
    for (std::size_t t = 0; t < n_live; ++t) {
      const double w = scores[t] / denom;
      const auto v = V.row(k_rows[live[t]]);
      for (std::size_t c = 0; c < V.cols(); ++c) out(oi, c) += w * v[c];
    }
  }
  return out;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

double block_pdf(const BlockProbModel& model, std::size_t n) {
  check_model(model);
  require(n < model.m_blocks(), Errc::distance_out_of_range,
          "block distance out of range");
  if (n <= model.cutoff) return 1.0;
  const double offset = static_cast<double>(n - model.cutoff);
  return 1.0 / (offset * (offset + 1.0));
}

double row_prob(const BlockProbModel& model, std::size_t q) {
  check_model(model);
  require(q < model.n_rows(), Errc::index_out_of_range,
          "block row index out of range");
  double sum = 0.0;
  for (std::size_t dist = 0; dist <= q; ++dist) sum += block_pdf(model, dist);
  return sum / static_cast<double>(q + 1);
}

double col_prob(const BlockProbModel& model, std::size_t c) {
  check_model(model);
  require(c < model.n_cols(), Errc::index_out_of_range,
          "block column index out of range");
  const std::size_t n_k = model.m_blocks() - c;
  double sum = 0.0;
  for (std::size_t dist = 0; dist < n_k; ++dist) sum += block_pdf(model, dist);
  return sum / static_cast<double>(n_k);
}

double decision_factor(double prob, const SelectionParams& params,
                       double draw) {
  return prob * params.weight + draw * (1.0 - params.weight);
}

double adjusted_sparsity(const std::vector<double>& probs,
                         const SelectionParams& params) {
  require(!probs.empty(), Errc::empty_probs, "no probabilities given");
  std::vector<double> sorted = probs;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank percentile; s = 0 takes the minimum.
  const double s = params.target_drop_pct;
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(s / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  const double p_s = sorted[rank - 1];
  return p_s * params.weight + (s / 100.0) * (1.0 - params.weight);
}

BlockMask build_mask(const BlockProbModel& model,
                     const SelectionParams& params) {
  check_model(model);
  const std::size_t n_rows = model.n_rows();
  const std::size_t n_cols = model.n_cols();

  std::vector<double> probs;
  probs.reserve(n_rows + n_cols);
  for (std::size_t q = 0; q < n_rows; ++q) probs.push_back(row_prob(model, q));
  for (std::size_t c = 0; c < n_cols; ++c) probs.push_back(col_prob(model, c));

  Rng rng(derive_seed(params.seed, "prflash/mask"));
  std::vector<double> row_draw(n_rows), col_draw(n_cols);
  for (std::size_t q = 0; q < n_rows; ++q) row_draw[q] = rng.uniform();
  for (std::size_t c = 0; c < n_cols; ++c) col_draw[c] = rng.uniform();

  const double s_adj = adjusted_sparsity(probs, params);

  BlockMask mask;
  mask.n_rows = n_rows;
  mask.n_cols = n_cols;
  std::vector<bool> row_kept(n_rows), col_kept(n_cols);
  for (std::size_t q = 0; q < n_rows; ++q) {
    row_kept[q] = decision_factor(probs[q], params, row_draw[q]) >= s_adj;
    if (row_kept[q]) mask.kept_rows.push_back(q);
  }
  for (std::size_t c = 0; c < n_cols; ++c) {
    col_kept[c] =
        decision_factor(probs[n_rows + c], params, col_draw[c]) >= s_adj;
    if (col_kept[c]) mask.kept_cols.push_back(c);
  }

  mask.keep_flat.assign(n_rows * n_cols, false);
  std::size_t causal = 0, kept = 0;
  for (std::size_t q = 0; q < n_rows; ++q) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c > q) continue;  // upper triangle stays excluded
      ++causal;
      const bool on_diagonal = c == q;
      const bool keep = on_diagonal || (row_kept[q] && col_kept[c]);
      mask.keep_flat[q * n_cols + c] = keep;
      if (keep) ++kept;
    }
  }
  mask.dropped_fraction =
      causal == 0 ? 0.0
                  : static_cast<double>(causal - kept) /
                        static_cast<double>(causal);
  return mask;
}

std::pair<Matrix, ErrorStats> masked_attention(const Matrix& Q,
                                               const Matrix& K,
                                               const Matrix& V,
                                               const BlockMask& mask,
                                               std::size_t block_rows,
                                               std::size_t block_cols) {
  require(Q.rows() == K.rows() && K.rows() == V.rows() &&
              Q.cols() == K.cols(),
          Errc::shape_mismatch, "Q/K/V shapes are inconsistent");
  require(Q.rows() <= 4096, Errc::too_large,
          "masked_attention is limited to 4096 tokens");
  // Block-index causality is only geometrically causal for square tiling;
  // with B_c > B_r a query's own diagonal block can hold no causal keys.
  require(block_rows == block_cols, Errc::shape_mismatch,
          "attention over a block mask requires square blocks");
  const std::size_t n = Q.rows();
  const auto all = iota_rows(n);

  const auto masked_allowed = [&](std::size_t i, std::size_t j) {
    return j <= i && mask.keep(i / block_rows, j / block_cols);
  };
  const auto causal_allowed = [](std::size_t i, std::size_t j) {
    return j <= i;
  };

  Matrix masked = attend_core(Q, K, V, all, all, masked_allowed);
  Matrix exact = attend_core(Q, K, V, all, all, causal_allowed);

  ErrorStats stats;
  stats.dropped_fraction = mask.dropped_fraction;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < V.cols(); ++c) {
      const double err = std::abs(masked(i, c) - exact(i, c));
      stats.max_abs_error = std::max(stats.max_abs_error, err);
      total += err;
    }
  stats.mean_abs_error = total / static_cast<double>(n * V.cols());
  return {std::move(masked), stats};
}

CompactMaps compact_reshape(const BlockMask& mask) {
  CompactMaps maps;
  for (std::size_t q = 0; q < mask.n_rows; ++q) {
    bool any = false;
    for (std::size_t c = 0; c < mask.n_cols; ++c) any |= mask.keep(q, c);
    if (any) maps.row_map.push_back(q);
  }
  for (std::size_t c = 0; c < mask.n_cols; ++c) {
    bool any = false;
    for (std::size_t q = 0; q < mask.n_rows; ++q) any |= mask.keep(q, c);
    if (any) maps.col_map.push_back(c);
  }
  return maps;
}

Matrix compacted_attention(const Matrix& Q, const Matrix& K, const Matrix& V,
                           const BlockMask& mask, const CompactMaps& maps,
                           std::size_t block_rows, std::size_t block_cols) {
  require(block_rows == block_cols, Errc::shape_mismatch,
          "attention over a block mask requires square blocks");
  const std::size_t n = Q.rows();
  std::vector<std::size_t> q_rows, k_rows;
  for (std::size_t block : maps.row_map)
    for (std::size_t r = block * block_rows;
         r < std::min(n, (block + 1) * block_rows); ++r)
      q_rows.push_back(r);
  for (std::size_t block : maps.col_map)
    for (std::size_t r = block * block_cols;
         r < std::min(n, (block + 1) * block_cols); ++r)
      k_rows.push_back(r);

  const auto allowed = [&](std::size_t i, std::size_t j) {
    return j <= i && mask.keep(i / block_rows, j / block_cols);
  };
  return attend_core(Q, K, V, q_rows, k_rows, allowed);
}

}  // namespace lmkit

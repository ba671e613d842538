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

#ifndef LMKIT_PRFLASH_HPP
#define LMKIT_PRFLASH_HPP

#include <cstdint>
#include <vector>

#include "lmkit/matrix.hpp"

namespace lmkit {

// Probability model over block distances: probability 1 within the cutoff k,
// then the harmonic deduction series 1/((n-k)(n-k+1)).
struct BlockProbModel {
  std::size_t context_len = 0;  // N
  std::size_t block_rows = 1;   // B_r, block size for Q
  std::size_t block_cols = 1;   // B_c, block size for K
  std::size_t cutoff = 0;       // k, full-probability distance

  std::size_t n_rows() const {
    return (context_len + block_rows - 1) / block_rows;
  }
  std::size_t n_cols() const {
    return (context_len + block_cols - 1) / block_cols;
  }
  std::size_t m_blocks() const { return std::max(n_rows(), n_cols()); }
};

struct SelectionParams {
  double weight = 0.5;  // w in [0,1]
  double target_drop_pct = 0.0;  // s in [0,100]
  std::uint64_t seed = 0;
};

// Causal block participation mask. keep(q, c) is false above the diagonal
// and true on it, always.
struct BlockMask {
  std::size_t n_rows = 0, n_cols = 0;
  std::vector<bool> keep_flat;  // row-major over (block row, block col)
  std::vector<std::size_t> kept_rows, kept_cols;  // survivors of thresholding
  double dropped_fraction = 0.0;

  bool keep(std::size_t q, std::size_t c) const {
    return keep_flat[q * n_cols + c];
  }
};

struct ErrorStats {
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  double dropped_fraction = 0.0;
};

double block_pdf(const BlockProbModel& model, std::size_t n);
double row_prob(const BlockProbModel& model, std::size_t q);
double col_prob(const BlockProbModel& model, std::size_t c);

double decision_factor(double prob, const SelectionParams& params, double draw);

// s_adj = p_s * w + (s/100) * (1-w); p_s is the nearest-rank s-th percentile.
double adjusted_sparsity(const std::vector<double>& probs,
                         const SelectionParams& params);

// Thresholds every block row and column with one seeded uniform draw each
// (rows first, then columns); a row/column is dropped when its decision
// factor is strictly below the adjusted sparsity, kept on equality. The
// diagonal is then re-asserted and the upper triangle cleared.
BlockMask build_mask(const BlockProbModel& model, const SelectionParams& params);

// Dense causal softmax attention restricted to the kept blocks (dropped
// blocks contribute -inf scores); also computes the exact full causal
// attention and reports the elementwise error against it.
std::pair<Matrix, ErrorStats> masked_attention(const Matrix& Q,
                                               const Matrix& K,
                                               const Matrix& V,
                                               const BlockMask& mask,
                                               std::size_t block_rows,
                                               std::size_t block_cols);

// Dense index remaps of the kept block rows/columns (old index -> new).
// Gathering Q/K/V through the maps and running attention over the compacted
// tensors reproduces masked_attention bit-exactly on the kept queries.
struct CompactMaps {
  std::vector<std::size_t> row_map;  // kept block-row order
  std::vector<std::size_t> col_map;
};
CompactMaps compact_reshape(const BlockMask& mask);

// The compacted-path attention used to check compact_reshape equivalence.
Matrix compacted_attention(const Matrix& Q, const Matrix& K, const Matrix& V,
                           const BlockMask& mask, const CompactMaps& maps,
                           std::size_t block_rows, std::size_t block_cols);

}  // namespace lmkit

#endif  // LMKIT_PRFLASH_HPP

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

#ifndef LMKIT_SAQ_HPP
#define LMKIT_SAQ_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lmkit/matrix.hpp"
#include "lmkit/rng.hpp"

namespace lmkit {

// Which tensor dimension owns the quantization granularity.
//  - token:   each token row is quantized independently; its channels are
//             split into d/G groups of G (value-cache convention).
//  - channel: each channel column is quantized independently; its tokens are
//             split into tokens/G groups of G (key-cache convention).
enum class GroupDim { token, channel };

struct QuantizedTensor {
  std::vector<std::uint16_t> codes;  // row-major (tokens x dim)
  int bits = 16;
  GroupDim group_dim = GroupDim::token;
  std::size_t group_size = 1;           // G
  std::size_t tokens = 0, dim = 0;      // logical shape
  std::vector<double> zero_points;      // per group
  std::vector<double> scales;           // per group; 0 for constant groups

  std::size_t group_count() const { return zero_points.size(); }
  std::size_t group_index(std::size_t token, std::size_t channel) const {
    if (group_dim == GroupDim::token)
      return token * (dim / group_size) + channel / group_size;
    return channel * (tokens / group_size) + token / group_size;
  }
};

// Asymmetric min/max group quantization: z = min, s = (max-min)/(2^B - 1),
// code = round-half-up((x - z)/s) clamped to [0, 2^B - 1].
QuantizedTensor group_quantize(const Matrix& x, int bits, GroupDim dim,
                               std::size_t group_size);
Matrix group_dequantize(const QuantizedTensor& qt);

struct SAQParams {
  std::size_t segment_size = 2;             // S, in tokens
  std::vector<int> bit_schedule = {16, 8, 4, 2};  // B_1..B_qn, B_1 = 16
  std::size_t group_size = 1;               // G
  std::size_t dim = 1;                      // head dimension d

  std::size_t q_n() const { return bit_schedule.size(); }
};

struct Projections {
  Matrix wq, wk, wv;  // d x d
  static Projections seeded(std::size_t dim, std::uint64_t seed);
};

// One cache segment; `level` indexes the bit schedule (1-based, so level i
// holds B_i bits). Levels are tracked explicitly because widths may repeat
// within a schedule. A 16-bit level is the full-precision tier and stores
// the values verbatim, fp16 standing in for full precision; footprint
// accounting still charges 16 bits per element.
struct CacheSegment {
  std::size_t level = 2;
  int bits = 16;
  bool is_quantized = false;
  QuantizedTensor data;  // when is_quantized
  Matrix raw;            // otherwise

  std::size_t tokens() const { return is_quantized ? data.tokens : raw.rows(); }
  Matrix values() const { return is_quantized ? group_dequantize(data) : raw; }
};

// Staircase-quantized key/value cache. Segments are ordered oldest first
// with non-increasing bit widths toward the newest; the most recent tokens
// sit in the full-precision residuals (keys: < S tokens at rest, flushed
// exactly at S; values: <= S tokens).
struct KVCache {
  SAQParams params;
  Projections proj;
  std::vector<CacheSegment> key_segments, value_segments;
  Matrix key_residual, value_residual;
  std::size_t tokens_seen = 0;

  std::size_t key_segment_tokens() const;
  std::size_t value_segment_tokens() const;
};

// Splits X_K into full segments of S plus an l-mod-S residual; segment i
// (1 = newest) is quantized along the channel dimension at B_{i+1}, with
// the oldest segment absorbing the overflow at B_{qn} once the staircase
// is full.
struct KquantResult {
  std::vector<CacheSegment> segments;  // oldest first
  Matrix residual;
};
KquantResult kquant(const Matrix& x_k, const SAQParams& params);

// Builds the cache from a prompt: keys via kquant, values segmented with
// the newest S tokens left full precision, and returns the exact projected
// K and V alongside (full precision flows to the consumer, only the
// quantized cache is retained).
struct PrefillResult {
  KVCache cache;
  Matrix k_exact, v_exact;
};
PrefillResult prefill(const Matrix& x, const SAQParams& params,
                      const Projections& proj);

KVCache empty_cache(const SAQParams& params, const Projections& proj);

// One decoding step: projects the embedding, appends to the residuals,
// flushes and demotes the staircase when a residual fills, then attends
// over dequantized segments plus residuals. Returns the attention output.
std::vector<double> decode_step(KVCache& cache,
                                std::span<const double> embedding);

// Total cache size in bits: codes at their segment widths, group metadata
// at 16 bits per scale and zero-point, full-precision data at 16 bits per
// element.
std::uint64_t cache_footprint(const KVCache& cache);

// Dense full-precision MQA step over exact caches, same score convention
// as decode_step (1/sqrt(d) scaling).
std::vector<double> dense_mqa_output(const Matrix& k, const Matrix& v,
                                     std::span<const double> t_q);

}  // namespace lmkit

#endif  // LMKIT_SAQ_HPP

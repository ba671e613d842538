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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "lmkit/rng.hpp"
#include "lmkit/saq.hpp"

using namespace lmkit;

namespace {

Matrix row_matrix(const std::vector<double>& values) {
  Matrix m(1, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(0, i) = values[i];
  return m;
}

SAQParams params_of(std::size_t S, std::vector<int> bits, std::size_t G,
                    std::size_t d) {
  SAQParams p;
  p.segment_size = S;
  p.bit_schedule = std::move(bits);
  p.group_size = G;
  p.dim = d;
  return p;
}

std::vector<int> segment_bits(const std::vector<CacheSegment>& segments) {
  std::vector<int> bits;
  for (const CacheSegment& s : segments) bits.push_back(s.bits);
  return bits;
}

std::vector<std::size_t> segment_sizes(
    const std::vector<CacheSegment>& segments) {
  std::vector<std::size_t> sizes;
  for (const CacheSegment& s : segments) sizes.push_back(s.tokens());
  return sizes;
}

void check_invariants(const KVCache& cache) {
  CHECK(cache.key_segment_tokens() + cache.key_residual.rows() ==
        cache.tokens_seen);
  CHECK(cache.value_segment_tokens() + cache.value_residual.rows() ==
        cache.tokens_seen);
  CHECK(cache.key_residual.rows() < cache.params.segment_size);
  CHECK(cache.value_residual.rows() <= cache.params.segment_size);
  for (const auto* side : {&cache.key_segments, &cache.value_segments})
    for (std::size_t i = 1; i < side->size(); ++i)
      CHECK((*side)[i - 1].bits <= (*side)[i].bits);  // oldest has fewest
}

}  // namespace

TEST_CASE("group_quantize reproduces the documented examples") {
  SUBCASE("exactly representable values") {
    const auto qt = group_quantize(row_matrix({0, 5, 10, 15}), 2,
                                   GroupDim::token, 4);
    CHECK(qt.zero_points == std::vector<double>{0.0});
    CHECK(qt.scales == std::vector<double>{5.0});
    CHECK(qt.codes == std::vector<std::uint16_t>{0, 1, 2, 3});
    const Matrix back = group_dequantize(qt);
    for (std::size_t c = 0; c < 4; ++c) CHECK(back(0, c) == 5.0 * c);
  }
  SUBCASE("rounding to the nearest level") {
    const auto qt = group_quantize(row_matrix({0, 1, 14, 15}), 2,
                                   GroupDim::token, 4);
    CHECK(qt.codes == std::vector<std::uint16_t>{0, 0, 3, 3});
    const Matrix back = group_dequantize(qt);
    CHECK(back(0, 0) == 0.0);
    CHECK(back(0, 1) == 0.0);
    CHECK(back(0, 2) == 15.0);
    CHECK(back(0, 3) == 15.0);
  }
  SUBCASE("constant groups use scale zero") {
    const auto qt = group_quantize(row_matrix({7, 7, 7, 7}), 2,
                                   GroupDim::token, 4);
    CHECK(qt.scales == std::vector<double>{0.0});
    const Matrix back = group_dequantize(qt);
    for (std::size_t c = 0; c < 4; ++c) CHECK(back(0, c) == 7.0);
  }
  SUBCASE("group size must divide the extent") {
    CHECK_THROWS_AS(group_quantize(row_matrix({1, 2, 3}), 2, GroupDim::token, 2),
                    Error);
    CHECK_THROWS_AS(group_quantize(Matrix(3, 2), 2, GroupDim::channel, 2),
                    Error);
  }
}

TEST_CASE("quantization round-trip error stays within half a scale step") {
  Rng rng(404);
  for (const int bits : {2, 4, 8, 16}) {
    for (int trial = 0; trial < 25; ++trial) {
      const Matrix x = Matrix::gaussian(8, 8, rng, 3.0);
      for (const GroupDim dim : {GroupDim::token, GroupDim::channel}) {
        const auto qt = group_quantize(x, bits, dim, 4);
        const Matrix back = group_dequantize(qt);
        for (std::size_t t = 0; t < x.rows(); ++t)
          for (std::size_t c = 0; c < x.cols(); ++c) {
            const double s = qt.scales[qt.group_index(t, c)];
            CHECK(std::abs(x(t, c) - back(t, c)) <= s / 2.0 + 1e-12);
          }
      }
    }
  }
}

TEST_CASE("channel grouping quantizes token runs per channel") {
  // Two channels with disjoint ranges; G=2 over 4 tokens gives 2 groups per
  // channel, so each group sees only its own half of the tokens.
  Matrix x(4, 2);
  for (std::size_t t = 0; t < 4; ++t) {
    x(t, 0) = static_cast<double>(t);        // 0..3
    x(t, 1) = 100.0 + static_cast<double>(t);  // 100..103
  }
  const auto qt = group_quantize(x, 8, GroupDim::channel, 2);
  CHECK(qt.group_count() == 4);
  CHECK(qt.zero_points[qt.group_index(0, 0)] == 0.0);
  CHECK(qt.zero_points[qt.group_index(2, 0)] == 2.0);
  CHECK(qt.zero_points[qt.group_index(0, 1)] == 100.0);
  CHECK(qt.zero_points[qt.group_index(2, 1)] == 102.0);
}

TEST_CASE("kquant segments follow the staircase traces") {
  const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);
  Rng rng(7);

  SUBCASE("l = S gives one B_2 segment and no residual") {
    const auto result = kquant(Matrix::gaussian(2, 4, rng), p);
    CHECK(segment_bits(result.segments) == std::vector<int>{8});
    CHECK(result.residual.rows() == 0);
  }
  SUBCASE("l = 2S+1 gives bits [4, 8] plus a one-token residual") {
    const auto result = kquant(Matrix::gaussian(5, 4, rng), p);
    CHECK(segment_bits(result.segments) == std::vector<int>{4, 8});
    CHECK(segment_sizes(result.segments) ==
          std::vector<std::size_t>{2, 2});
    CHECK(result.residual.rows() == 1);
  }
  SUBCASE("l < S is residual only") {
    const auto result = kquant(Matrix::gaussian(1, 4, rng), p);
    CHECK(result.segments.empty());
    CHECK(result.residual.rows() == 1);
  }
  SUBCASE("overflow collapses into the oldest B_qn segment") {
    const auto result = kquant(Matrix::gaussian(12, 4, rng), p);
    CHECK(segment_bits(result.segments) == std::vector<int>{2, 4, 8});
    CHECK(segment_sizes(result.segments) ==
          std::vector<std::size_t>{8, 2, 2});
  }
}

TEST_CASE("prefill splits the prompt into the documented staircase") {
  const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);

  SUBCASE("l=8: value bits [2,4,8] plus a 2-token residual") {
    Rng rng(1);
    const auto result = prefill(Matrix::gaussian(8, 4, rng), p,
                                Projections::seeded(4, 0));
    CHECK(segment_bits(result.cache.value_segments) ==
          std::vector<int>{2, 4, 8});
    CHECK(segment_sizes(result.cache.value_segments) ==
          std::vector<std::size_t>{2, 2, 2});
    CHECK(result.cache.value_residual.rows() == 2);
    CHECK(result.cache.tokens_seen == 8);
    check_invariants(result.cache);
  }
  SUBCASE("l <= S leaves everything in the residuals") {
    Rng rng(2);
    const auto result = prefill(Matrix::gaussian(2, 4, rng), p,
                                Projections::seeded(4, 0));
    CHECK(result.cache.value_segments.empty());
    CHECK(result.cache.value_residual.rows() == 2);
    // keys flush at exactly S, so l = S already forms one segment
    CHECK(segment_bits(result.cache.key_segments) == std::vector<int>{8});
    check_invariants(result.cache);
  }
  SUBCASE("l=12 (s_n > q_n): oldest value segment holds 3S tokens at 2 bits") {
    Rng rng(3);
    const auto result = prefill(Matrix::gaussian(12, 4, rng), p,
                                Projections::seeded(4, 0));
    CHECK(segment_bits(result.cache.value_segments) ==
          std::vector<int>{2, 4, 8});
    CHECK(segment_sizes(result.cache.value_segments) ==
          std::vector<std::size_t>{6, 2, 2});
    CHECK(result.cache.value_residual.rows() == 2);
    check_invariants(result.cache);
  }
  SUBCASE("exact K and V are returned full precision") {
    Rng rng(4);
    const Matrix x = Matrix::gaussian(6, 4, rng);
    const Projections proj = Projections::seeded(4, 0);
    const auto result = prefill(x, p, proj);
    const Matrix k = matmul(x, proj.wk);
    for (std::size_t t = 0; t < k.rows(); ++t)
      for (std::size_t c = 0; c < k.cols(); ++c)
        CHECK(result.k_exact(t, c) == k(t, c));
  }
}

TEST_CASE("first decode step after an empty prefill returns t_V exactly") {
  const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);
  const Projections proj = Projections::seeded(4, 11);
  KVCache cache = empty_cache(p, proj);
  Rng rng(5);
  std::vector<double> emb(4);
  for (double& v : emb) v = rng.gaussian();
  const auto out = decode_step(cache, emb);

  Matrix t(1, 4);
  for (std::size_t c = 0; c < 4; ++c) t(0, c) = emb[c];
  const Matrix t_v = matmul(t, proj.wv);
  for (std::size_t c = 0; c < 4; ++c) CHECK(out[c] == t_v(0, c));
  check_invariants(cache);
}

TEST_CASE("key staircase demotes on every flush") {
  const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);
  KVCache cache = empty_cache(p, Projections::seeded(4, 21));
  Rng rng(6);
  const auto step = [&] {
    std::vector<double> emb(4);
    for (double& v : emb) v = rng.gaussian();
    decode_step(cache, emb);
  };
  step();
  step();  // S steps: residual flushed into one 8-bit segment
  CHECK(segment_bits(cache.key_segments) == std::vector<int>{8});
  CHECK(cache.key_residual.rows() == 0);
  step();
  step();  // next flush demotes the previous segment to 4 bits
  CHECK(segment_bits(cache.key_segments) == std::vector<int>{4, 8});
  step();
  step();
  CHECK(segment_bits(cache.key_segments) == std::vector<int>{2, 4, 8});
  step();
  step();  // the two bottom-level segments merge
  CHECK(segment_bits(cache.key_segments) == std::vector<int>{2, 4, 8});
  CHECK(segment_sizes(cache.key_segments) ==
        std::vector<std::size_t>{4, 2, 2});
  check_invariants(cache);
}

TEST_CASE("invariants hold across a long decode with a prefill") {
  const SAQParams p = params_of(4, {16, 8, 4, 2}, 2, 8);
  Rng rng(31);
  const Projections proj = Projections::seeded(8, 31);
  auto result = prefill(Matrix::gaussian(11, 8, rng), p, proj);
  KVCache cache = std::move(result.cache);
  for (int step = 0; step < 96; ++step) {
    std::vector<double> emb(8);
    for (double& v : emb) v = rng.gaussian();
    decode_step(cache, emb);
    check_invariants(cache);
    for (const CacheSegment& seg : cache.key_segments) {
      bool in_schedule = false;
      for (int b : p.bit_schedule) in_schedule |= seg.bits == b;
      CHECK(in_schedule);
    }
  }
  CHECK(cache.tokens_seen == 11 + 96);
}

TEST_CASE("an all-16 schedule matches the dense MQA reference") {
  const SAQParams p = params_of(2, {16, 16, 16, 16}, 2, 8);
  const Projections proj = Projections::seeded(8, 77);
  KVCache cache = empty_cache(p, proj);
  Rng rng(77);
  Matrix k_exact(0, 8), v_exact(0, 8);
  for (int step = 0; step < 64; ++step) {
    std::vector<double> emb(8);
    for (double& v : emb) v = rng.gaussian();
    Matrix t(1, 8);
    for (std::size_t c = 0; c < 8; ++c) t(0, c) = emb[c];
    k_exact.append_row(matmul(t, proj.wk).row(0));
    v_exact.append_row(matmul(t, proj.wv).row(0));
    const auto out = decode_step(cache, emb);
    const auto ref =
        dense_mqa_output(k_exact, v_exact, matmul(t, proj.wq).row(0));
    for (std::size_t c = 0; c < 8; ++c)
      CHECK(std::abs(out[c] - ref[c]) <=
            1e-5 * std::max(1.0, std::abs(ref[c])));
  }
}

TEST_CASE("cache_footprint counts codes, metadata and residuals") {
  SUBCASE("empty cache") {
    const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);
    const KVCache cache = empty_cache(p, Projections::seeded(4, 0));
    CHECK(cache_footprint(cache) == 0);
  }
  SUBCASE("documented 2-bit example: 144 bits") {
    const SAQParams p = params_of(2, {16, 8, 4, 2}, 2, 4);
    KVCache cache = empty_cache(p, Projections::seeded(4, 0));
    Rng rng(1);
    CacheSegment seg;
    seg.level = 4;
    seg.bits = 2;
    seg.is_quantized = true;
    seg.data = group_quantize(Matrix::gaussian(2, 4, rng), 2,
                              GroupDim::token, 2);
    cache.key_segments.push_back(seg);
    CHECK(cache_footprint(cache) == 2 * 4 * 2 + 4 * 2 * 16);
  }
  SUBCASE("full-precision cache of n tokens costs n*d*16*2") {
    const SAQParams p = params_of(8, {16, 8, 4, 2}, 2, 4);
    KVCache cache = empty_cache(p, Projections::seeded(4, 0));
    Rng rng(2);
    for (int r = 0; r < 5; ++r) {
      const Matrix row = Matrix::gaussian(1, 4, rng);
      cache.key_residual.append_row(row.row(0));
      cache.value_residual.append_row(row.row(0));
    }
    CHECK(cache_footprint(cache) == 5ull * 4 * 16 * 2);
  }
  SUBCASE("staircase beats full precision once tokens exceed S*q_n") {
    // Group metadata costs 32/G bits per element, so savings need a group
    // size where bits + 32/G < 16 at every quantized level.
    const SAQParams p = params_of(8, {16, 8, 4, 2}, 8, 8);
    KVCache cache = empty_cache(p, Projections::seeded(8, 5));
    Rng rng(3);
    for (int step = 0; step < 3 * 8 * 4; ++step) {  // 3 * S * q_n
      std::vector<double> emb(8);
      for (double& v : emb) v = rng.gaussian();
      decode_step(cache, emb);
      const std::uint64_t fp =
          static_cast<std::uint64_t>(cache.tokens_seen) * 8 * 16 * 2;
      if (cache.tokens_seen > p.segment_size * p.q_n())
        CHECK(cache_footprint(cache) < fp);
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  Rng rng(9);
  const Matrix x = Matrix::gaussian(4, 4, rng);
  SUBCASE("schedule must start at 16") {
    CHECK_THROWS_AS(prefill(x, params_of(2, {8, 4}, 2, 4),
                            Projections::seeded(4, 0)),
                    Error);
  }
  SUBCASE("schedule must be non-increasing") {
    CHECK_THROWS_AS(prefill(x, params_of(2, {16, 4, 8}, 2, 4),
                            Projections::seeded(4, 0)),
                    Error);
  }
  SUBCASE("G must divide d and S") {
    CHECK_THROWS_AS(prefill(x, params_of(2, {16, 8}, 3, 4),
                            Projections::seeded(4, 0)),
                    Error);
    CHECK_THROWS_AS(prefill(x, params_of(3, {16, 8}, 2, 4),
                            Projections::seeded(4, 0)),
                    Error);
  }
  SUBCASE("embedding width must match") {
    const SAQParams p = params_of(2, {16, 8}, 2, 4);
    KVCache cache = empty_cache(p, Projections::seeded(4, 0));
    const std::vector<double> bad(3, 0.0);
    CHECK_THROWS_AS(decode_step(cache, bad), Error);
  }
}

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

#include "lmkit/saq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmkit {
namespace {

void validate_params(const SAQParams& p) {
  require(p.segment_size >= 1, Errc::dimension_mismatch, "S must be >= 1");
  require(p.q_n() >= 2, Errc::dimension_mismatch,
          "bit schedule needs a full-precision level plus one quantized level");
  require(p.bit_schedule.front() == 16, Errc::dimension_mismatch,
          "B_1 must be the 16-bit full-precision level");
  for (std::size_t i = 0; i < p.q_n(); ++i) {
    require(p.bit_schedule[i] >= 1 && p.bit_schedule[i] <= 16,
            Errc::dimension_mismatch, "bit widths must be in 1..16");
    require(i == 0 || p.bit_schedule[i] <= p.bit_schedule[i - 1],
            Errc::dimension_mismatch, "bit schedule must be non-increasing");
  }
  require(p.group_size >= 1 && p.dim % p.group_size == 0,
          Errc::group_size_mismatch, "G must divide the head dimension");
  require(p.segment_size % p.group_size == 0, Errc::group_size_mismatch,
          "G must divide the segment size");
}

// Encodes a float block at one schedule level. A 16-bit level is the
// full-precision tier and keeps the values verbatim.
CacheSegment encode_segment(const Matrix& values, std::size_t level,
                            GroupDim dim, const SAQParams& params) {
  CacheSegment seg;
  seg.level = level;
  seg.bits = params.bit_schedule[level - 1];
  if (seg.bits == 16) {
    seg.is_quantized = false;
    seg.raw = values;
  } else {
    seg.is_quantized = true;
    seg.data = group_quantize(values, seg.bits, dim, params.group_size);
  }
  return seg;
}

// Joins two same-level segments; for quantized channel-grouped data the
// token extents must both be multiples of G so the group partitions align.
CacheSegment merge_segments(const CacheSegment& a, const CacheSegment& b) {
  require(a.level == b.level && a.bits == b.bits &&
              a.is_quantized == b.is_quantized,
          Errc::dimension_mismatch, "cannot merge mismatched segments");
  CacheSegment out;
  out.level = a.level;
  out.bits = a.bits;
  out.is_quantized = a.is_quantized;
  if (!a.is_quantized) {
    out.raw = a.raw;
    for (std::size_t r = 0; r < b.raw.rows(); ++r)
      out.raw.append_row(b.raw.row(r));
    return out;
  }
  const QuantizedTensor& qa = a.data;
  const QuantizedTensor& qb = b.data;
  require(qa.group_dim == qb.group_dim && qa.group_size == qb.group_size &&
              qa.dim == qb.dim,
          Errc::dimension_mismatch, "cannot merge mismatched segments");
  if (qa.group_dim == GroupDim::channel)
    require(qa.tokens % qa.group_size == 0, Errc::group_size_mismatch,
            "merge requires group-aligned extents");
  QuantizedTensor merged;
  merged.bits = qa.bits;
  merged.group_dim = qa.group_dim;
  merged.group_size = qa.group_size;
  merged.tokens = qa.tokens + qb.tokens;
  merged.dim = qa.dim;
  merged.codes.resize(merged.tokens * merged.dim);
  merged.zero_points.resize(merged.tokens * merged.dim / merged.group_size);
  merged.scales.resize(merged.zero_points.size());
  const auto copy_from = [&](const QuantizedTensor& src, std::size_t offset) {
    for (std::size_t t = 0; t < src.tokens; ++t)
      for (std::size_t c = 0; c < src.dim; ++c) {
        merged.codes[(offset + t) * merged.dim + c] =
            src.codes[t * src.dim + c];
        const std::size_t g = merged.group_index(offset + t, c);
        merged.zero_points[g] = src.zero_points[src.group_index(t, c)];
        merged.scales[g] = src.scales[src.group_index(t, c)];
      }
  };
  copy_from(qa, 0);
  copy_from(qb, qa.tokens);
  out.data = std::move(merged);
  return out;
}

// Demotes every segment (except the newest when `skip_newest`) one level
// down the schedule by decoding it and re-encoding at the next level;
// segments already at the bottom are re-encoded in place, and adjacent
// bottom-level segments then merge into the single oldest segment.
void demote(std::vector<CacheSegment>& segments, const SAQParams& params,
            GroupDim dim, bool skip_newest) {
  if (segments.empty()) return;
  const std::size_t q_n = params.q_n();
  const std::size_t limit = segments.size() - (skip_newest ? 1 : 0);
  for (std::size_t i = 0; i < limit; ++i) {
    const Matrix floats = segments[i].values();
    const std::size_t next = std::min(segments[i].level + 1, q_n);
    segments[i] = encode_segment(floats, next, dim, params);
  }
  std::size_t i = 0;
  while (i + 1 < segments.size()) {
    if (segments[i].level == q_n && segments[i + 1].level == q_n) {
      segments[i] = merge_segments(segments[i], segments[i + 1]);
      segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    } else {
      ++i;
    }
  }
}

std::size_t segment_tokens(const std::vector<CacheSegment>& segments) {
  std::size_t total = 0;
  for (const CacheSegment& seg : segments) total += seg.tokens();
  return total;
}

}  // namespace

QuantizedTensor group_quantize(const Matrix& x, int bits, GroupDim dim,
                               std::size_t group_size) {
  require(bits >= 1 && bits <= 16, Errc::dimension_mismatch,
          "bits must be in 1..16");
  if (dim == GroupDim::token)
    require(x.cols() % group_size == 0, Errc::group_size_mismatch,
            "G must divide the channel extent for token grouping");
  else
    require(x.rows() % group_size == 0, Errc::group_size_mismatch,
            "G must divide the token extent for channel grouping");

  QuantizedTensor qt;
  qt.bits = bits;
  qt.group_dim = dim;
  qt.group_size = group_size;
  qt.tokens = x.rows();
  qt.dim = x.cols();
  qt.codes.assign(qt.tokens * qt.dim, 0);
  const std::size_t n_groups = qt.tokens * qt.dim / group_size;
  qt.zero_points.assign(n_groups, 0.0);
  qt.scales.assign(n_groups, 0.0);

  std::vector<double> lo(n_groups, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_groups, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < qt.tokens; ++t)
    for (std::size_t c = 0; c < qt.dim; ++c) {
      const std::size_t g = qt.group_index(t, c);
      lo[g] = std::min(lo[g], x(t, c));
      hi[g] = std::max(hi[g], x(t, c));
    }
  const double levels = static_cast<double>((1u << bits) - 1);
  for (std::size_t g = 0; g < n_groups; ++g) {
    qt.zero_points[g] = lo[g];
    qt.scales[g] = (hi[g] - lo[g]) / levels;
  }
  for (std::size_t t = 0; t < qt.tokens; ++t)
    for (std::size_t c = 0; c < qt.dim; ++c) {
      const std::size_t g = qt.group_index(t, c);
      if (qt.scales[g] == 0.0) continue;  // constant group
      double code = std::floor((x(t, c) - qt.zero_points[g]) / qt.scales[g] +
                               0.5);
      code = std::clamp(code, 0.0, levels);
      qt.codes[t * qt.dim + c] = static_cast<std::uint16_t>(code);
    }
  return qt;
}

Matrix group_dequantize(const QuantizedTensor& qt) {
  Matrix out(qt.tokens, qt.dim);
  for (std::size_t t = 0; t < qt.tokens; ++t)
    for (std::size_t c = 0; c < qt.dim; ++c) {
      const std::size_t g = qt.group_index(t, c);
      out(t, c) = static_cast<double>(qt.codes[t * qt.dim + c]) *
                      qt.scales[g] +
                  qt.zero_points[g];
    }
  return out;
}

Projections Projections::seeded(std::size_t dim, std::uint64_t seed) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(derive_seed(seed, "saq/projections"));
  Projections p;
  p.wq = Matrix::gaussian(dim, dim, rng, scale);
  p.wk = Matrix::gaussian(dim, dim, rng, scale);
  p.wv = Matrix::gaussian(dim, dim, rng, scale);
  return p;
}

std::size_t KVCache::key_segment_tokens() const {
  return segment_tokens(key_segments);
}
std::size_t KVCache::value_segment_tokens() const {
  return segment_tokens(value_segments);
}

KquantResult kquant(const Matrix& x_k, const SAQParams& params) {
  validate_params(params);
  require(x_k.cols() == params.dim, Errc::dimension_mismatch,
          "key tensor width must equal the head dimension");
  const std::size_t l = x_k.rows();
  const std::size_t S = params.segment_size;
  const std::size_t q_n = params.q_n();
  const std::size_t r = l % S;
  const std::size_t body = l - r;
  const std::size_t s_n = l / S;

  KquantResult out;
  out.residual = x_k.slice_rows(body, l);
  if (s_n == 0) return out;

  // Segment i (1 = newest) covers [body - i*S, body - (i-1)*S) at B_{i+1};
  // past the staircase depth, the remainder forms one oldest segment at
  // B_{qn}.
  std::vector<std::pair<std::size_t, std::size_t>> pieces;  // (begin, level)
  if (s_n <= q_n - 1) {
    for (std::size_t i = 1; i <= s_n; ++i)
      pieces.emplace_back(body - i * S, i + 1);
  } else {
    for (std::size_t i = 1; i <= q_n - 2; ++i)
      pieces.emplace_back(body - i * S, i + 1);
    pieces.emplace_back(0, q_n);
  }
  // pieces are newest-first; emit oldest-first.
  std::size_t end = body;
  std::vector<CacheSegment> newest_first;
  for (const auto& [begin, level] : pieces) {
    newest_first.push_back(encode_segment(x_k.slice_rows(begin, end), level,
                                          GroupDim::channel, params));
    end = begin;
  }
  out.segments.assign(newest_first.rbegin(), newest_first.rend());
  return out;
}

KVCache empty_cache(const SAQParams& params, const Projections& proj) {
  validate_params(params);
  KVCache cache;
  cache.params = params;
  cache.proj = proj;
  cache.key_residual = Matrix(0, params.dim);
  cache.value_residual = Matrix(0, params.dim);
  return cache;
}

PrefillResult prefill(const Matrix& x, const SAQParams& params,
                      const Projections& proj) {
  validate_params(params);
  require(x.rows() >= 1, Errc::dimension_mismatch, "prompt must be non-empty");
  require(x.cols() == params.dim, Errc::dimension_mismatch,
          "prompt width must equal the head dimension");

  PrefillResult out;
  out.cache = empty_cache(params, proj);
  out.k_exact = matmul(x, proj.wk);
  out.v_exact = matmul(x, proj.wv);

  KquantResult keys = kquant(out.k_exact, params);
  out.cache.key_segments = std::move(keys.segments);
  out.cache.key_residual = std::move(keys.residual);

  const std::size_t l = x.rows();
  const std::size_t S = params.segment_size;
  const std::size_t q_n = params.q_n();
  const std::size_t res_len = std::min(l, S);
  out.cache.value_residual = out.v_exact.slice_rows(l - res_len, l);
  const std::size_t glen = l - res_len;
  if (glen > 0) {
    const std::size_t s_n = l / S;
    const std::size_t n_seg =
        std::max<std::size_t>(1, std::min(s_n, q_n) - 1);
    // Newest n_seg-1 segments of exactly S tokens, the oldest absorbing
    // the remainder; bits B_2 (newest) through B_{n_seg+1}.
    std::vector<CacheSegment> newest_first;
    std::size_t end = glen;
    for (std::size_t i = 1; i <= n_seg; ++i) {
      const std::size_t begin = (i < n_seg) ? end - S : 0;
      newest_first.push_back(encode_segment(out.v_exact.slice_rows(begin, end),
                                            i + 1, GroupDim::token, params));
      end = begin;
    }
    out.cache.value_segments.assign(newest_first.rbegin(),
                                    newest_first.rend());
  }
  out.cache.tokens_seen = l;
  return out;
}

std::vector<double> decode_step(KVCache& cache,
                                std::span<const double> embedding) {
  const SAQParams& params = cache.params;
  require(embedding.size() == params.dim, Errc::dimension_mismatch,
          "embedding width must equal the head dimension");
  const std::size_t d = params.dim;
  const std::size_t S = params.segment_size;

  Matrix t(1, d);
  for (std::size_t c = 0; c < d; ++c) t(0, c) = embedding[c];
  const Matrix t_q = matmul(t, cache.proj.wq);
  const Matrix t_k = matmul(t, cache.proj.wk);
  const Matrix t_v = matmul(t, cache.proj.wv);

  cache.key_residual.append_row(t_k.row(0));
  cache.value_residual.append_row(t_v.row(0));
  ++cache.tokens_seen;

  // Key path: flush the residual exactly when it reaches S, demoting every
  // existing segment one level.
  if (cache.key_residual.rows() == S) {
    demote(cache.key_segments, params, GroupDim::channel,
           /*skip_newest=*/false);
    KquantResult flushed = kquant(cache.key_residual, params);
    for (CacheSegment& seg : flushed.segments)
      cache.key_segments.push_back(std::move(seg));
    cache.key_residual.clear_rows();
  }

  // Value path: keep the newest S tokens full precision; older overflow is
  // encoded at B_2 into the open newest segment, and the staircase demotes
  // whenever the quantized pool grows to a multiple of S.
  if (cache.value_residual.rows() > S) {
    const std::size_t overflow = cache.value_residual.rows() - S;
    CacheSegment piece =
        encode_segment(cache.value_residual.slice_rows(0, overflow), 2,
                       GroupDim::token, params);
    const bool extend = !cache.value_segments.empty() &&
                        cache.value_segments.back().level == 2 &&
                        cache.value_segments.back().tokens() < S;
    if (extend)
      cache.value_segments.back() =
          merge_segments(cache.value_segments.back(), piece);
    else
      cache.value_segments.push_back(std::move(piece));
    cache.value_residual.drop_front_rows(overflow);
    if (cache.value_segment_tokens() % S == 0)
      demote(cache.value_segments, params, GroupDim::token,
             /*skip_newest=*/true);
  }

  // Attention over dequantized keys (oldest first) plus the key residual.
  std::vector<double> scores;
  scores.reserve(cache.tokens_seen);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (const CacheSegment& seg : cache.key_segments) {
    const Matrix keys = seg.values();
    for (std::size_t r = 0; r < keys.rows(); ++r)
      scores.push_back(dot(t_q.row(0), keys.row(r)) * inv_sqrt_d);
  }
  for (std::size_t r = 0; r < cache.key_residual.rows(); ++r)
    scores.push_back(dot(t_q.row(0), cache.key_residual.row(r)) * inv_sqrt_d);

  double top = -std::numeric_limits<double>::infinity();
  for (const double s : scores) top = std::max(top, s);
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    denom += s;
  }
  for (double& s : scores) s /= denom;

  // Split the weights at the value pool/residual boundary.
  std::vector<double> out(d, 0.0);
  std::size_t pos = 0;
  for (const CacheSegment& seg : cache.value_segments) {
    const Matrix values = seg.values();
    for (std::size_t r = 0; r < values.rows(); ++r, ++pos)
      for (std::size_t c = 0; c < d; ++c) out[c] += scores[pos] * values(r, c);
  }
  for (std::size_t r = 0; r < cache.value_residual.rows(); ++r, ++pos)
    for (std::size_t c = 0; c < d; ++c)
      out[c] += scores[pos] * cache.value_residual(r, c);
  return out;
}

std::uint64_t cache_footprint(const KVCache& cache) {
  std::uint64_t bits = 0;
  const auto side = [&](const std::vector<CacheSegment>& segments,
                        const Matrix& residual) {
    for (const CacheSegment& seg : segments) {
      if (seg.is_quantized)
        bits += static_cast<std::uint64_t>(seg.data.tokens) * seg.data.dim *
                    static_cast<std::uint64_t>(seg.data.bits) +
                static_cast<std::uint64_t>(seg.data.group_count()) * 2u * 16u;
      else
        bits += static_cast<std::uint64_t>(seg.raw.rows()) * seg.raw.cols() *
                16u;
    }
    bits += static_cast<std::uint64_t>(residual.rows()) * residual.cols() *
            16u;
  };
  side(cache.key_segments, cache.key_residual);
  side(cache.value_segments, cache.value_residual);
  return bits;
}

std::vector<double> dense_mqa_output(const Matrix& k, const Matrix& v,
                                     std::span<const double> t_q) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(k.cols()));
  std::vector<double> scores(k.rows());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < k.rows(); ++r) {
    scores[r] = dot(t_q, k.row(r)) * inv_sqrt_d;
    top = std::max(top, scores[r]);
  }
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    denom += s;
  }
  std::vector<double> out(v.cols(), 0.0);
  for (std::size_t r = 0; r < k.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c)
      out[c] += scores[r] / denom * v(r, c);
  return out;
}

}  // namespace lmkit

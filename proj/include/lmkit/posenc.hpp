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

#ifndef LMKIT_POSENC_HPP
#define LMKIT_POSENC_HPP

#include <span>
#include <vector>

#include "lmkit/matrix.hpp"

namespace lmkit {

struct AttentionInputs {
  Matrix Q, K, V;  // (sequence length x head dimension)
};

// Head slopes: for 8 heads the series 1/2, 1/4, ..., 1/256; otherwise a
// geometric series with ratio 2^(-8/H) starting at 2^(-8/H).
std::vector<double> alibi_slopes(int heads);

// Linear distance bias for query position i (1-indexed):
// m * [-(i-1), ..., -1, 0] over key positions 1..i.
std::vector<double> alibi_bias(int i, double m);

// Harmonic-factored bias: entry j is m * (-(i-j)) / (j*(j+1)).
std::vector<double> harmonic_bias(int i, double m);

// Sum of 1/(k(k+1)) for k = 1..i; telescopes to i/(i+1).
double harmonic_factor_sum(int i);

// Rotates coordinate pairs (x[2t], x[2t+1]) by angle pos * base^(-2t/d).
// Norm preserving; dot products of rotated vectors depend only on the
// relative position.
std::vector<double> rope_apply(std::span<const double> x, int pos,
                               double base = 10000.0);

// The factored combination: RoPE-rotated Q and K, scaled dot products,
// harmonic-factored distance biases with the head's slope, causal mask,
// row-wise softmax. Returns the (L x L) attention weight matrix.
Matrix factored_scores(const AttentionInputs& inputs,
                       const std::vector<double>& slopes, int head,
                       double base = 10000.0);

}  // namespace lmkit

#endif  // LMKIT_POSENC_HPP

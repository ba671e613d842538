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

#ifndef LMKIT_SKIPGRAM_HPP
#define LMKIT_SKIPGRAM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lmkit/corpus.hpp"
#include "lmkit/matrix.hpp"

namespace lmkit {

struct HyperTuple {
  int window_c = 2;       // context window radius
  int dim_d = 8;          // embedding dimensionality
  double subsample_sf = 1e-3;  // frequency threshold for subsampling
  int min_count_mc = 1;   // vocabulary minimum count

  auto operator<=>(const HyperTuple&) const = default;
};

// Full-softmax skip-gram model over a small vocabulary. Exposed so the
// analytic gradients can be checked against finite differences.
class SkipGramModel {
 public:
  SkipGramModel(std::size_t vocab, std::size_t dim)
      : input_(vocab, dim), output_(vocab, dim) {}

  Matrix& input() { return input_; }
  Matrix& output() { return output_; }
  const Matrix& input() const { return input_; }
  const Matrix& output() const { return output_; }

  // log softmax(input_[center] . output_^T)[context]
  double log_prob(std::size_t center, std::size_t context) const;

  // Mean log probability over (center, context) pairs; the quantity both
  // trained and reported. Always <= 0.
  double mean_log_prob(
      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const;

  // Adds the gradient of mean_log_prob(pairs) to g_input/g_output.
  void accumulate_gradients(
      const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
      Matrix& g_input, Matrix& g_output) const;

  // One in-place stochastic gradient-ascent update for a single pair.
  void sgd_update(std::size_t center, std::size_t context, double lr);

 private:
  Matrix input_, output_;
};

// Deterministic skip-gram evaluation used as the CEHPO objective:
//  1. vocabulary = corpus words with count >= m_c, ordered by
//     (count desc, word asc); words off the vocabulary are dropped;
//  2. each kept occurrence is discarded with probability
//     max(0, 1 - sqrt(s_f / relative_frequency)) using one seeded uniform
//     draw per occurrence;
//  3. every fifth center position (0, 5, 10, ...) of the resulting stream
//     is held out; the rest trains;
//  4. input embeddings start uniform in [-0.5/d, 0.5/d), output embeddings
//     start at zero; `epochs` in-order SGD passes at a fixed learning rate;
//  5. returns the mean log probability over the held-out window pairs.
struct SkipGramEvalConfig {
  int epochs = 30;
  double learning_rate = 0.1;
};

double skipgram_eval(const Corpus& corpus, const HyperTuple& tuple,
                     std::uint64_t seed, const SkipGramEvalConfig& config = {});

}  // namespace lmkit

#endif  // LMKIT_SKIPGRAM_HPP

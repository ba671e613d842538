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

#include "lmkit/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lmkit/rng.hpp"

namespace lmkit {
namespace {

std::vector<double> softmax_scores(const Matrix& input, const Matrix& output,
                                   std::size_t center) {
  std::vector<double> p(output.rows());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < output.rows(); ++o) {
    p[o] = dot(input.row(center), output.row(o));
    top = std::max(top, p[o]);
  }
  double denom = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    denom += v;
  }
  for (double& v : p) v /= denom;
  return p;
}

}  // namespace

double SkipGramModel::log_prob(std::size_t center, std::size_t context) const {
  const std::vector<double> p = softmax_scores(input_, output_, center);
  return std::log(p[context]);
}

double SkipGramModel::mean_log_prob(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const {
  double total = 0.0;
  for (const auto& [center, context] : pairs) total += log_prob(center, context);
  return total / static_cast<double>(pairs.size());
}

void SkipGramModel::accumulate_gradients(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    Matrix& g_input, Matrix& g_output) const {
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (const auto& [center, context] : pairs) {
    const std::vector<double> p = softmax_scores(input_, output_, center);
    // d log p(context|center) / d output_o = (1{o=context} - p_o) * u_center
    // d log p(context|center) / d u_center = w_context - sum_o p_o w_o
    for (std::size_t o = 0; o < output_.rows(); ++o) {
      const double coef =
          ((o == context ? 1.0 : 0.0) - p[o]) * inv_n;
      for (std::size_t c = 0; c < output_.cols(); ++c)
        g_output(o, c) += coef * input_(center, c);
    }
    for (std::size_t c = 0; c < input_.cols(); ++c) {
      double g = output_(context, c);
      for (std::size_t o = 0; o < output_.rows(); ++o)
        g -= p[o] * output_(o, c);
      g_input(center, c) += g * inv_n;
    }
  }
}

void SkipGramModel::sgd_update(std::size_t center, std::size_t context,
                               double lr) {
  const std::vector<double> p = softmax_scores(input_, output_, center);
  // Both gradients are taken at the current parameters, then applied.
  std::vector<double> g_center(input_.cols());
  for (std::size_t c = 0; c < input_.cols(); ++c) {
    double g = output_(context, c);
    for (std::size_t o = 0; o < output_.rows(); ++o) g -= p[o] * output_(o, c);
    g_center[c] = g;
  }
  for (std::size_t o = 0; o < output_.rows(); ++o) {
    const double coef = (o == context ? 1.0 : 0.0) - p[o];
    for (std::size_t c = 0; c < output_.cols(); ++c)
      output_(o, c) += lr * coef * input_(center, c);
  }
  for (std::size_t c = 0; c < input_.cols(); ++c)
    input_(center, c) += lr * g_center[c];
}

double skipgram_eval(const Corpus& corpus, const HyperTuple& tuple,
                     std::uint64_t seed, const SkipGramEvalConfig& config) {
  require(tuple.dim_d >= 1 && tuple.window_c >= 1 && tuple.subsample_sf > 0.0,
          Errc::config_invalid, "invalid hyperparameter tuple");

  // Vocabulary: words meeting the minimum count, most frequent first.
  std::map<std::string, std::int64_t> freq;
  for (const std::string& word : corpus.words) ++freq[word];
  std::vector<std::pair<std::string, std::int64_t>> vocab_order;
  for (const auto& [word, count] : freq)
    if (count >= tuple.min_count_mc) vocab_order.emplace_back(word, count);
  require(!vocab_order.empty(), Errc::vocab_empty,
          "no word meets the minimum count");
  std::sort(vocab_order.begin(), vocab_order.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second > b.second
                                          : a.first < b.first;
            });
  std::map<std::string, std::size_t> word_id;
  for (std::size_t i = 0; i < vocab_order.size(); ++i)
    word_id[vocab_order[i].first] = i;

  std::vector<std::size_t> stream;
  for (const std::string& word : corpus.words) {
    auto it = word_id.find(word);
    if (it != word_id.end()) stream.push_back(it->second);
  }
  require(stream.size() >=
              2 * static_cast<std::size_t>(tuple.window_c) + 1,
          Errc::corpus_too_small,
          "corpus too small for the window after min-count filtering");

  // Subsampling: one draw per occurrence, in stream order.
  std::vector<std::int64_t> id_count(vocab_order.size(), 0);
  for (const std::size_t id : stream) ++id_count[id];
  const double total = static_cast<double>(stream.size());
  Rng subsample_rng(derive_seed(seed, "skipgram/subsample"));
  std::vector<std::size_t> kept;
  for (const std::size_t id : stream) {
    const double rel = static_cast<double>(id_count[id]) / total;
    const double discard =
        std::max(0.0, 1.0 - std::sqrt(tuple.subsample_sf / rel));
    const double u = subsample_rng.uniform();
    if (u >= discard) kept.push_back(id);
  }

  // Window pairs, split by center position: every fifth center is held out.
  const std::size_t c = static_cast<std::size_t>(tuple.window_c);
  std::vector<std::pair<std::size_t, std::size_t>> train_pairs, eval_pairs;
  for (std::size_t t = 0; t < kept.size(); ++t) {
    auto& bucket = (t % 5 == 0) ? eval_pairs : train_pairs;
    const std::size_t lo = t >= c ? t - c : 0;
    const std::size_t hi = std::min(kept.size() - 1, t + c);
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != t) bucket.emplace_back(kept[t], kept[j]);
  }
  require(!eval_pairs.empty(), Errc::corpus_too_small,
          "no held-out window pairs after subsampling");

  SkipGramModel model(vocab_order.size(),
                      static_cast<std::size_t>(tuple.dim_d));
  Rng init_rng(derive_seed(seed, "skipgram/init"));
  const double spread = 0.5 / static_cast<double>(tuple.dim_d);
  for (std::size_t r = 0; r < model.input().rows(); ++r)
    for (std::size_t col = 0; col < model.input().cols(); ++col)
      model.input()(r, col) = init_rng.uniform(-spread, spread);
  // output embeddings start at zero: the untrained model is exactly the
  // uniform softmax.

  for (int epoch = 0; epoch < config.epochs; ++epoch)
    for (const auto& [center, context] : train_pairs)
      model.sgd_update(center, context, config.learning_rate);

  return model.mean_log_prob(eval_pairs);
}

}  // namespace lmkit

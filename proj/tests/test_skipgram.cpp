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
#include <string>
#include <vector>

#include "doctest.h"
#include "lmkit/cehpo.hpp"
#include "lmkit/rng.hpp"
#include "lmkit/skipgram.hpp"

using namespace lmkit;

namespace {

std::string alternating_corpus(int repeats) {
  std::string text;
  for (int i = 0; i < repeats; ++i) text += i % 2 ? "b " : "a ";
  text.pop_back();
  return text;
}

SkipGramModel random_model(std::size_t vocab, std::size_t dim, Rng& rng) {
  SkipGramModel model(vocab, dim);
  for (std::size_t r = 0; r < vocab; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      model.input()(r, c) = rng.gaussian() * 0.3;
      model.output()(r, c) = rng.gaussian() * 0.3;
    }
  return model;
}

std::vector<std::pair<std::size_t, std::size_t>> random_pairs(
    std::size_t vocab, std::size_t count, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < count; ++i)
    pairs.emplace_back(
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(vocab) - 1)),
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(vocab) - 1)));
  return pairs;
}

}  // namespace

TEST_CASE("identical embeddings give the uniform softmax") {
  SkipGramModel model(7, 4);
  // input rows equal, output rows zero: every prediction is uniform
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 4; ++c) model.input()(r, c) = 0.25;
  const double lp = model.log_prob(0, 3);
  CHECK(lp == doctest::Approx(-std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(2718);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t vocab =
        static_cast<std::size_t>(rng.uniform_int(3, 20));
    const std::size_t dim = static_cast<std::size_t>(rng.uniform_int(2, 8));
    SkipGramModel model = random_model(vocab, dim, rng);
    const auto pairs = random_pairs(vocab, 12, rng);

    Matrix g_input(vocab, dim), g_output(vocab, dim);
    model.accumulate_gradients(pairs, g_input, g_output);

    const double h = 1e-5;
    // spot-check a handful of coordinates per trial
    for (int probe = 0; probe < 6; ++probe) {
      const std::size_t r =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(vocab) - 1));
      const std::size_t c =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(dim) - 1));
      const bool on_input = rng.uniform() < 0.5;
      Matrix& target = on_input ? model.input() : model.output();
      const double saved = target(r, c);
      target(r, c) = saved + h;
      const double up = model.mean_log_prob(pairs);
      target(r, c) = saved - h;
      const double down = model.mean_log_prob(pairs);
      target(r, c) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = on_input ? g_input(r, c) : g_output(r, c);
      CHECK(std::abs(numeric - analytic) <=
            1e-4 * std::max(1.0, std::abs(numeric)));
    }
  }
}

TEST_CASE("skipgram_eval is deterministic and bounded above by zero") {
  const Corpus corpus =
      load_corpus("the cat sat on the mat the cat ran to the mat", '_');
  HyperTuple tuple;
  tuple.window_c = 2;
  tuple.dim_d = 4;
  tuple.subsample_sf = 1.0;  // keep everything
  tuple.min_count_mc = 1;
  const double a = skipgram_eval(corpus, tuple, 42);
  const double b = skipgram_eval(corpus, tuple, 42);
  CHECK(a == b);
  CHECK(a <= 0.0);
  const double other_seed = skipgram_eval(corpus, tuple, 43);
  CHECK(other_seed <= 0.0);
}

TEST_CASE("training a perfectly predictive corpus approaches log(1)") {
  const Corpus corpus = load_corpus(alternating_corpus(40), '_');
  HyperTuple tuple;
  tuple.window_c = 1;
  tuple.dim_d = 4;
  tuple.subsample_sf = 1.0;
  tuple.min_count_mc = 1;
  SkipGramEvalConfig cfg;
  cfg.epochs = 0;
  const double untrained = skipgram_eval(corpus, tuple, 7, cfg);
  // untrained: uniform over a 2-word vocabulary
  CHECK(untrained == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  cfg.epochs = 40;
  const double trained = skipgram_eval(corpus, tuple, 7, cfg);
  CHECK(trained > untrained);
  CHECK(trained <= 0.0);
  CHECK(trained > -0.05);  // close to log(1) = 0
}

TEST_CASE("skipgram_eval matches an independent reimplementation") {
  // Straightforward transcription of the documented procedure, written
  // against the same RNG streams but with its own training loop.
  const std::string text = "red fox red dog red fox blue dog red fox";
  const Corpus corpus = load_corpus(text, '_');
  HyperTuple tuple;
  tuple.window_c = 1;
  tuple.dim_d = 3;
  tuple.subsample_sf = 0.9;
  tuple.min_count_mc = 2;
  const std::uint64_t seed = 99;
  SkipGramEvalConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 0.1;
  const double lib = skipgram_eval(corpus, tuple, seed, cfg);

  // vocabulary: counts red_=4, fox_=3, dog_=2 (blue_ dropped by m_c=2),
  // ordered by count desc -> ids {red_:0, fox_:1, dog_:2}
  const std::vector<std::size_t> stream_ids = {0, 1, 0, 2, 0, 1, 2, 0, 1};
  std::vector<std::int64_t> counts(3, 0);
  for (std::size_t id : stream_ids) ++counts[id];
  Rng sub(derive_seed(seed, "skipgram/subsample"));
  std::vector<std::size_t> kept;
  for (std::size_t id : stream_ids) {
    const double rel =
        static_cast<double>(counts[id]) / static_cast<double>(stream_ids.size());
    const double discard = std::max(0.0, 1.0 - std::sqrt(0.9 / rel));
    if (sub.uniform() >= discard) kept.push_back(id);
  }
  std::vector<std::pair<std::size_t, std::size_t>> train, eval;
  for (std::size_t t = 0; t < kept.size(); ++t) {
    auto& bucket = (t % 5 == 0) ? eval : train;
    if (t >= 1) bucket.emplace_back(kept[t], kept[t - 1]);
    if (t + 1 < kept.size()) bucket.emplace_back(kept[t], kept[t + 1]);
  }
  REQUIRE(!eval.empty());
  Matrix u(3, 3), w(3, 3);
  Rng init(derive_seed(seed, "skipgram/init"));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      u(r, c) = init.uniform(-0.5 / 3.0, 0.5 / 3.0);
  const auto softmax_at = [&](std::size_t center) {
    std::vector<double> p(3);
    double top = -1e300;
    for (std::size_t o = 0; o < 3; ++o) {
      p[o] = 0.0;
      for (std::size_t c = 0; c < 3; ++c) p[o] += u(center, c) * w(o, c);
      top = std::max(top, p[o]);
    }
    double denom = 0.0;
    for (double& v : p) {
      v = std::exp(v - top);
      denom += v;
    }
    for (double& v : p) v /= denom;
    return p;
  };
  for (int epoch = 0; epoch < 5; ++epoch) {
    for (const auto& [center, context] : train) {
      const auto p = softmax_at(center);
      std::vector<double> gu(3);
      for (std::size_t c = 0; c < 3; ++c) {
        gu[c] = w(context, c);
        for (std::size_t o = 0; o < 3; ++o) gu[c] -= p[o] * w(o, c);
      }
      for (std::size_t o = 0; o < 3; ++o) {
        const double coef = (o == context ? 1.0 : 0.0) - p[o];
        for (std::size_t c = 0; c < 3; ++c)
          w(o, c) += 0.1 * coef * u(center, c);
      }
      for (std::size_t c = 0; c < 3; ++c) u(center, c) += 0.1 * gu[c];
    }
  }
  double total = 0.0;
  for (const auto& [center, context] : eval)
    total += std::log(softmax_at(center)[context]);
  const double reference = total / static_cast<double>(eval.size());

  CHECK(lib == doctest::Approx(reference).epsilon(1e-12));
}

TEST_CASE("skipgram_eval rejects degenerate corpora") {
  HyperTuple tuple;
  tuple.window_c = 3;
  tuple.dim_d = 2;
  tuple.subsample_sf = 1.0;
  tuple.min_count_mc = 1;
  const Corpus tiny = load_corpus("a b", '_');
  CHECK_THROWS_AS(skipgram_eval(tiny, tuple, 1), Error);

  tuple.min_count_mc = 10;
  const Corpus sparse = load_corpus("a b c d e f g h", '_');
  CHECK_THROWS_AS(skipgram_eval(sparse, tuple, 1), Error);
}

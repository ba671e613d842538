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

#include "lmkit/cehpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmkit/rng.hpp"

namespace lmkit {
namespace {

void check_ranges(const HyperRanges& r) {
  require(r.c_min <= r.c_max && r.d_min <= r.d_max && r.mc_min <= r.mc_max &&
              r.sf_min <= r.sf_max && r.sf_min > 0.0,
          Errc::range_empty, "hyperparameter range is empty");
}

HyperTuple uniform_tuple(const HyperRanges& r, Rng& rng) {
  HyperTuple t;
  t.window_c = static_cast<int>(rng.uniform_int(r.c_min, r.c_max));
  t.dim_d = static_cast<int>(rng.uniform_int(r.d_min, r.d_max));
  t.subsample_sf =
      r.sf_min == r.sf_max ? r.sf_min : rng.uniform(r.sf_min, r.sf_max);
  t.min_count_mc = static_cast<int>(rng.uniform_int(r.mc_min, r.mc_max));
  return t;
}

int elite_draw_count(const CehpoConfig& cfg) {
  const double raw =
      cfg.favorability * static_cast<double>(cfg.samples_per_round) * cfg.rho;
  const int n = static_cast<int>(std::floor(raw + 0.5));  // round half up
  return std::clamp(n, 0, cfg.samples_per_round);
}

}  // namespace

double gamma_quantile(const std::vector<double>& scores, double rho) {
  require(!scores.empty(), Errc::empty_scores, "no scores");
  require(rho > 0.0 && rho <= 1.0, Errc::config_invalid,
          "rho must be in (0, 1]");
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(rho * static_cast<double>(sorted.size())));
  return sorted[rank - 1];
}

std::map<HyperTuple, double> estimate_probs(
    const std::vector<HyperTuple>& samples, const std::vector<double>& scores,
    double gamma) {
  require(samples.size() == scores.size(), Errc::config_invalid,
          "samples/scores length mismatch");
  std::size_t hits = 0;
  for (const double s : scores)
    if (s >= gamma) ++hits;
  require(hits > 0, Errc::no_elite_samples, "no score meets gamma");
  std::map<HyperTuple, double> q;
  const double mass = 1.0 / static_cast<double>(hits);
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (scores[i] >= gamma) q[samples[i]] += mass;
  return q;
}

std::map<HyperTuple, double> smooth_probs(
    const std::map<HyperTuple, double>& q_est,
    const std::map<HyperTuple, double>& q_prev, double alpha) {
  std::map<HyperTuple, double> q;
  for (const auto& [tuple, w] : q_est) q[tuple] += alpha * w;
  for (const auto& [tuple, w] : q_prev) q[tuple] += (1.0 - alpha) * w;
  return q;
}

std::map<HyperTuple, double> normalize_elite(
    const std::map<HyperTuple, double>& q,
    const std::vector<HyperTuple>& elite) {
  double mass = 0.0;
  for (const HyperTuple& t : elite) {
    auto it = q.find(t);
    if (it != q.end()) mass += it->second;
  }
  require(mass > 0.0, Errc::zero_mass, "elite weights sum to zero");
  std::map<HyperTuple, double> out;
  for (const HyperTuple& t : elite) {
    auto it = q.find(t);
    out[t] = (it == q.end() ? 0.0 : it->second) / mass;
  }
  return out;
}

std::vector<HyperTuple> sample_round(const CEState& state,
                                     const HyperRanges& ranges, int samples,
                                     double favorability, double rho,
                                     std::uint64_t seed) {
  check_ranges(ranges);
  require(samples >= 1, Errc::config_invalid, "need at least one sample");
  Rng rng(seed);
  std::vector<HyperTuple> out;
  out.reserve(static_cast<std::size_t>(samples));
  if (state.round == 0 || state.elite.empty()) {
    for (int i = 0; i < samples; ++i) out.push_back(uniform_tuple(ranges, rng));
    return out;
  }
  const double raw = favorability * static_cast<double>(samples) * rho;
  int n_elite = static_cast<int>(std::floor(raw + 0.5));
  n_elite = std::clamp(n_elite, 0, samples);
  for (int i = 0; i < n_elite; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    const HyperTuple* chosen = &state.elite.back();
    for (const HyperTuple& t : state.elite) {
      auto it = state.q_normalized.find(t);
      acc += it == state.q_normalized.end() ? 0.0 : it->second;
      if (u < acc) {
        chosen = &t;
        break;
      }
    }
    out.push_back(*chosen);
  }
  for (int i = n_elite; i < samples; ++i)
    out.push_back(uniform_tuple(ranges, rng));
  return out;
}

std::pair<HyperTuple, CEState> run_cehpo(const Objective& objective,
                                         const HyperRanges& ranges,
                                         const CehpoConfig& config) {
  check_ranges(ranges);
  require(config.samples_per_round >= 1 && config.rho > 0.0 &&
              config.rho <= 1.0 && config.alpha > 0.0 && config.alpha <= 1.0 &&
              config.stall_rounds >= 1 && config.max_rounds >= 1 &&
              config.eps_gamma >= 0.0 && config.favorability >= 0.0,
          Errc::config_invalid, "invalid CEHPO configuration");

  CEState state;
  const std::uint64_t objective_seed = derive_seed(config.seed, "cehpo/objective");
  HyperTuple best;
  double best_score = 0.0;
  bool have_best = false;

  for (int t = 1; t <= config.max_rounds; ++t) {
    const std::uint64_t round_seed =
        derive_seed(config.seed, "cehpo/round/" + std::to_string(t));
    std::vector<HyperTuple> samples =
        sample_round(state, ranges, config.samples_per_round,
                     config.favorability, config.rho, round_seed);
    std::vector<double> scores(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
      scores[i] = objective(samples[i], objective_seed);

    const double gamma = gamma_quantile(scores, config.rho);
    const auto q_est = estimate_probs(samples, scores, gamma);
    state.q = smooth_probs(q_est, state.q, config.alpha);

    std::vector<HyperTuple> elite;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (scores[i] < gamma) continue;
      if (std::find(elite.begin(), elite.end(), samples[i]) == elite.end())
        elite.push_back(samples[i]);
    }
    state.elite = std::move(elite);
    state.q_normalized = normalize_elite(state.q, state.elite);

    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!have_best || scores[i] > best_score) {
        have_best = true;
        best_score = scores[i];
        best = samples[i];
      }
    }

    state.samples = std::move(samples);
    state.scores = std::move(scores);
    state.gamma_history.push_back(gamma);
    state.round = t;
    state.log.push_back({t, gamma, best_score, best,
                         t == 1 ? 0 : elite_draw_count(config)});

    // Stop once gamma has been flat across the last stall_rounds rounds.
    const int l = config.stall_rounds;
    if (t >= l + 1) {
      bool flat = true;
      for (int j = 1; j <= l && flat; ++j)
        flat = std::abs(gamma - state.gamma_history[static_cast<std::size_t>(
                                    t - 1 - j)]) <= config.eps_gamma;
      if (flat) break;
    }
  }
  return {best, std::move(state)};
}

int SyntheticObjective::sf_bin(double sf) const {
  const double width = (ranges.sf_max - ranges.sf_min) /
                       static_cast<double>(sf_bins);
  int bin = static_cast<int>(std::floor((sf - ranges.sf_min) / width));
  return std::clamp(bin, 0, sf_bins - 1);
}

double SyntheticObjective::operator()(const HyperTuple& tuple,
                                      std::uint64_t) const {
  const double dc = static_cast<double>(tuple.window_c - opt_c);
  const double dd = static_cast<double>(tuple.dim_d - opt_d);
  const double dm = static_cast<double>(tuple.min_count_mc - opt_mc);
  const double db = static_cast<double>(sf_bin(tuple.subsample_sf) - opt_sf_bin);
  return -(dc * dc + dd * dd + dm * dm + db * db);
}

}  // namespace lmkit

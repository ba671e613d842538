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

#ifndef LMKIT_CEHPO_HPP
#define LMKIT_CEHPO_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "lmkit/skipgram.hpp"

namespace lmkit {

// Inclusive value ranges for the (c, d, s_f, m_c) search space.
struct HyperRanges {
  int c_min = 1, c_max = 10;
  int d_min = 1, d_max = 64;
  double sf_min = 1e-4, sf_max = 1e-1;
  int mc_min = 1, mc_max = 5;
};

struct CehpoConfig {
  int samples_per_round = 100;  // M
  double rho = 0.01;
  double alpha = 0.7;
  double favorability = 10.0;  // s
  int stall_rounds = 5;        // l
  int max_rounds = 200;
  double eps_gamma = 1e-9;
  std::uint64_t seed = 0;
};

struct RoundRecord {
  int round = 0;
  double gamma = 0.0;
  double best_score = 0.0;
  HyperTuple best;
  int elite_draws = 0;  // N_s actually used this round
};

struct CEState {
  int round = 0;  // completed rounds
  std::vector<HyperTuple> samples;
  std::vector<double> scores;
  std::vector<double> gamma_history;
  std::map<HyperTuple, double> q;             // smoothed weights
  std::map<HyperTuple, double> q_normalized;  // over the elite set
  std::vector<HyperTuple> elite;              // deduped, sample order
  std::vector<RoundRecord> log;
};

using Objective = std::function<double(const HyperTuple&, std::uint64_t)>;

// The ceil(rho*M)-th largest score: the threshold met by the top rho
// fraction of performers.
double gamma_quantile(const std::vector<double>& scores, double rho);

// Indicator weights over the samples at or above gamma, keyed by tuple
// value (duplicate tuples accumulate); sums to 1.
std::map<HyperTuple, double> estimate_probs(
    const std::vector<HyperTuple>& samples, const std::vector<double>& scores,
    double gamma);

// alpha * q_est + (1 - alpha) * q_prev per tuple; absent entries count as 0.
std::map<HyperTuple, double> smooth_probs(
    const std::map<HyperTuple, double>& q_est,
    const std::map<HyperTuple, double>& q_prev, double alpha);

// Restriction of q to the elite set, renormalized to sum to 1.
std::map<HyperTuple, double> normalize_elite(
    const std::map<HyperTuple, double>& q,
    const std::vector<HyperTuple>& elite);

// First round: M uniform tuples over the ranges. Later rounds: N_s =
// round(s*M*rho) tuples drawn with replacement from the elite under the
// normalized weights, the rest uniform. Per-tuple draw order is
// c, d, s_f, m_c.
std::vector<HyperTuple> sample_round(const CEState& state,
                                     const HyperRanges& ranges, int samples,
                                     double favorability, double rho,
                                     std::uint64_t seed);

// The full optimization loop; stops when gamma has stalled within eps_gamma
// for stall_rounds consecutive rounds or max_rounds is reached. Returns the
// best-scoring tuple ever evaluated.
std::pair<HyperTuple, CEState> run_cehpo(const Objective& objective,
                                         const HyperRanges& ranges,
                                         const CehpoConfig& config);

// Planted grid objective for optimizer validation: integer coordinates are
// used as-is, s_f is snapped to one of `sf_bins` equal bins, and the score
// is the negative squared cell distance to the planted optimum.
struct SyntheticObjective {
  HyperRanges ranges;
  int sf_bins = 3;
  int opt_c = 2, opt_d = 2, opt_mc = 2, opt_sf_bin = 1;

  int sf_bin(double sf) const;
  double operator()(const HyperTuple& tuple, std::uint64_t seed) const;
};

}  // namespace lmkit

#endif  // LMKIT_CEHPO_HPP

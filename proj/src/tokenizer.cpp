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

#include "lmkit/tokenizer.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace lmkit {
namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

std::size_t utf8_char_count(std::string_view s) {
  std::size_t n = 0;
  for (char ch : s)
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
  return n;
}

// Per-span step costs for one corpus. Costs are unit fractions 1/den with
// den = count+1; comparing path costs exactly reduces to integer sums of
// weight = D/den once D is a common multiple of all denominators. When D
// does not fit (very large corpora), comparisons fall back to doubles.
struct SpanCosts {
  std::size_t n = 0;             // characters
  std::size_t max_len = 0;       // longest within-word span
  std::vector<std::size_t> end;  // word end per position
  // Indexed [pos * max_len + (len-1)]; zero weight marks an invalid span.
  std::vector<std::int64_t> weight;
  std::vector<double> cost;
  bool exact = false;
  std::int64_t scale = 1;  // D

  bool valid(std::size_t p, std::size_t len) const {
    return p + len <= end[p];
  }
  std::int64_t w(std::size_t p, std::size_t len) const {
    return weight[p * max_len + len - 1];
  }
  double c(std::size_t p, std::size_t len) const {
    return cost[p * max_len + len - 1];
  }
};

SpanCosts make_span_costs(const Corpus& corpus, const CountTable& table) {
  SpanCosts sc;
  sc.n = corpus.total_chars();
  sc.end.resize(sc.n);
  for (std::size_t p = 0; p < sc.n; ++p) sc.end[p] = corpus.word_end_of(p);
  for (std::size_t p = 0; p < sc.n; ++p)
    sc.max_len = std::max(sc.max_len, sc.end[p] - p);

  std::vector<std::int64_t> den(sc.n * sc.max_len, 0);
  std::int64_t lcm = 1;
  bool exact = true;
  // Guard so that (longest possible path) * D stays well inside int64.
  const std::int64_t limit =
      (std::numeric_limits<std::int64_t>::max() / 8) /
      static_cast<std::int64_t>(std::max<std::size_t>(sc.n, 1));
  for (std::size_t p = 0; p < sc.n; ++p) {
    for (std::size_t len = 1; sc.valid(p, len); ++len) {
      const std::int64_t d = table.count(corpus.span_text(p, p + len)) + 1;
      den[p * sc.max_len + len - 1] = d;
      if (exact) {
        const std::int64_t g = std::gcd(lcm, d);
        if (lcm / g > limit / d)
          exact = false;
        else
          lcm = lcm / g * d;
      }
    }
  }
  sc.exact = exact;
  sc.scale = lcm;
  sc.weight.assign(den.size(), 0);
  sc.cost.assign(den.size(), 0.0);
  for (std::size_t i = 0; i < den.size(); ++i) {
    if (den[i] == 0) continue;
    sc.cost[i] = 1.0 / static_cast<double>(den[i]);
    if (exact) sc.weight[i] = lcm / den[i];
  }
  return sc;
}

void check_feasible_k(const Corpus& corpus, std::size_t k) {
  require(k >= corpus.word_count && k <= corpus.total_chars(),
          Errc::infeasible_k,
          "k must satisfy word_count <= k <= total_chars (k=" +
              std::to_string(k) + ", w=" + std::to_string(corpus.word_count) +
              ", n=" + std::to_string(corpus.total_chars()) + ")");
}

Segmentation finish(const Corpus& corpus, const CountTable& table,
                    std::vector<Span> spans) {
  Segmentation seg;
  seg.spans = std::move(spans);
  seg.cost = path_cost(seg, corpus, table);
  return seg;
}

// ---------------------------------------------------------------------------
// Greedy trainers (shared machinery)
// ---------------------------------------------------------------------------

struct TrainWord {
  std::vector<std::string> tokens;  // current split, one char each initially
  std::int64_t freq = 0;
};

struct TrainState {
  std::vector<TrainWord> words;  // distinct words, first-occurrence order
  std::vector<std::size_t> occurrence;  // corpus word -> distinct index
  std::int64_t total_tokens = 0;
};

TrainState init_train_state(const Corpus& corpus) {
  TrainState st;
  std::map<std::string, std::size_t> index;
  for (const std::string& word : corpus.words) {
    auto [it, inserted] = index.emplace(word, st.words.size());
    if (inserted) {
      TrainWord tw;
      std::size_t j = 0;
      while (j < word.size()) {
        std::size_t k = j + 1;
        while (k < word.size() &&
               (static_cast<unsigned char>(word[k]) & 0xC0) == 0x80)
          ++k;
        tw.tokens.push_back(word.substr(j, k - j));
        j = k;
      }
      st.words.push_back(std::move(tw));
    }
    st.occurrence.push_back(it->second);
  }
  for (const std::size_t i : st.occurrence) ++st.words[i].freq;
  for (const TrainWord& tw : st.words)
    st.total_tokens += tw.freq * static_cast<std::int64_t>(tw.tokens.size());
  return st;
}

// Merges all left-to-right non-overlapping occurrences of (left,right).
void apply_merge(TrainState& st, const Merge& m) {
  for (TrainWord& tw : st.words) {
    std::vector<std::string> out;
    out.reserve(tw.tokens.size());
    std::size_t i = 0;
    while (i < tw.tokens.size()) {
      if (i + 1 < tw.tokens.size() && tw.tokens[i] == m.left &&
          tw.tokens[i + 1] == m.right) {
        out.push_back(m.merged);
        i += 2;
      } else {
        out.push_back(tw.tokens[i]);
        ++i;
      }
    }
    st.total_tokens -=
        tw.freq * static_cast<std::int64_t>(tw.tokens.size() - out.size());
    tw.tokens = std::move(out);
  }
}

Segmentation state_to_segmentation(const Corpus& corpus,
                                   const CountTable& table,
                                   const TrainState& st) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  for (const std::size_t i : st.occurrence) {
    for (const std::string& tok : st.words[i].tokens) {
      const std::size_t len = utf8_char_count(tok);
      spans.push_back({pos, pos + len});
      pos += len;
    }
  }
  return finish(corpus, table, std::move(spans));
}

// Runs the greedy merge loop with a caller-supplied pair scorer. The scorer
// sees (left, right, merged) and returns the selection score; higher wins,
// ties prefer the lexicographically smallest (merged, left).
template <typename ScoreFn>
std::pair<Segmentation, MergeList> greedy_train(const Corpus& corpus,
                                                const CountTable& table,
                                                std::size_t k,
                                                ScoreFn&& score) {
  check_feasible_k(corpus, k);
  TrainState st = init_train_state(corpus);
  MergeList history;
  while (st.total_tokens > static_cast<std::int64_t>(k)) {
    bool found = false;
    Merge best;
    std::int64_t best_score = 0;
    for (const TrainWord& tw : st.words) {
      for (std::size_t i = 0; i + 1 < tw.tokens.size(); ++i) {
        Merge cand{tw.tokens[i], tw.tokens[i + 1],
                   tw.tokens[i] + tw.tokens[i + 1]};
        const std::int64_t s = score(st, cand);
        if (!found || s > best_score ||
            (s == best_score &&
             std::tie(cand.merged, cand.left) <
                 std::tie(best.merged, best.left))) {
          found = true;
          best_score = s;
          best = std::move(cand);
        }
      }
    }
    if (!found) break;  // every word is a single token already
    apply_merge(st, best);
    history.merges.push_back(std::move(best));
  }
  history.final_k = static_cast<std::size_t>(st.total_tokens);
  return {state_to_segmentation(corpus, table, st), std::move(history)};
}

}  // namespace

std::vector<std::string> Segmentation::token_strings(
    const Corpus& corpus) const {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) out.push_back(token(corpus, i));
  return out;
}

double step_cost(const CountTable& table, std::string_view token) {
  return 1.0 / (static_cast<double>(table.count(token)) + 1.0);
}

double path_cost(const Segmentation& seg, const Corpus& corpus,
                 const CountTable& table) {
  double total = 0.0;
  for (const Span& s : seg.spans)
    total += step_cost(table, corpus.span_text(s.begin, s.end));
  return total;
}

Segmentation swe_optimal(const Corpus& corpus, const CountTable& table,
                         std::size_t k) {
  check_feasible_k(corpus, k);
  require(corpus.total_chars() == 0 ||
              (k + 1) <= 200'000'000 / corpus.total_chars(),
          Errc::too_large, "position x step table would exceed memory");
  const SpanCosts sc = make_span_costs(corpus, table);
  const std::size_t n = sc.n;

  // Suffix DP over the layered DAG: dp[p][s] = best cost of covering
  // characters [p, n) with exactly s spans.
  const auto at = [&](std::size_t p, std::size_t s) { return p * (k + 1) + s; };
  std::vector<std::int64_t> dpi;
  std::vector<double> dpd;
  if (sc.exact)
    dpi.assign((n + 1) * (k + 1), kInf);
  else
    dpd.assign((n + 1) * (k + 1), std::numeric_limits<double>::infinity());

  if (sc.exact)
    dpi[at(n, 0)] = 0;
  else
    dpd[at(n, 0)] = 0.0;

  for (std::size_t p = n; p-- > 0;) {
    const std::size_t max_len = sc.end[p] - p;
    for (std::size_t len = 1; len <= max_len; ++len) {
      const std::size_t q = p + len;
      for (std::size_t s = 1; s <= k; ++s) {
        if (sc.exact) {
          const std::int64_t rest = dpi[at(q, s - 1)];
          if (rest >= kInf) continue;
          const std::int64_t cand = sc.w(p, len) + rest;
          if (cand < dpi[at(p, s)]) dpi[at(p, s)] = cand;
        } else {
          const double rest = dpd[at(q, s - 1)];
          if (!(rest < std::numeric_limits<double>::infinity())) continue;
          const double cand = sc.c(p, len) + rest;
          if (cand < dpd[at(p, s)]) dpd[at(p, s)] = cand;
        }
      }
    }
  }

  // Reconstruct left to right, taking the smallest boundary that still
  // achieves the optimum; this yields the lexicographically smallest
  // boundary-position vector among all optimal paths.
  std::vector<Span> spans;
  std::size_t p = 0, s = k;
  while (p < n) {
    const std::size_t max_len = sc.end[p] - p;
    bool advanced = false;
    for (std::size_t len = 1; len <= max_len && !advanced; ++len) {
      const std::size_t q = p + len;
      if (s == 0) break;
      if (sc.exact) {
        if (dpi[at(q, s - 1)] < kInf &&
            sc.w(p, len) + dpi[at(q, s - 1)] == dpi[at(p, s)])
          advanced = true;
      } else {
        if (dpd[at(q, s - 1)] < std::numeric_limits<double>::infinity() &&
            sc.c(p, len) + dpd[at(q, s - 1)] == dpd[at(p, s)])
          advanced = true;
      }
      if (advanced) {
        spans.push_back({p, q});
        p = q;
        --s;
      }
    }
    require(advanced, Errc::infeasible_k, "no feasible k-step path");
  }
  return finish(corpus, table, std::move(spans));
}

Segmentation swe_bruteforce(const Corpus& corpus, const CountTable& table,
                            std::size_t k) {
  require(corpus.total_chars() <= 30, Errc::too_large,
          "brute-force oracle is limited to 30 characters");
  check_feasible_k(corpus, k);
  const SpanCosts sc = make_span_costs(corpus, table);
  const std::size_t n = sc.n;

  // Words remaining at or after each position, for pruning.
  std::vector<std::size_t> words_left(n + 1, 0);
  for (std::size_t p = n; p-- > 0;) {
    words_left[p] = words_left[p + 1];
    for (std::size_t b : corpus.word_char_begin)
      if (b == p) ++words_left[p];
  }

  std::vector<std::size_t> bounds, best_bounds;
  bool have_best = false;
  std::int64_t best_wi = 0;
  double best_wd = 0.0;

  // Depth-first over every placement of span boundaries; boundaries are
  // visited in increasing order, so on exact cost ties the first hit is the
  // lexicographically smallest boundary vector.
  auto recurse = [&](auto&& self, std::size_t p, std::size_t left,
                     std::int64_t wi, double wd) -> void {
    if (p == n) {
      if (left != 0) return;
      const bool better =
          !have_best || (sc.exact ? wi < best_wi : wd < best_wd);
      if (better) {
        have_best = true;
        best_wi = wi;
        best_wd = wd;
        best_bounds = bounds;
      }
      return;
    }
    if (left == 0) return;
    if (left < words_left[p] || left > n - p) return;  // infeasible
    const std::size_t max_len = sc.end[p] - p;
    for (std::size_t len = 1; len <= max_len; ++len) {
      bounds.push_back(p + len);
      self(self, p + len, left - 1, wi + (sc.exact ? sc.w(p, len) : 0),
           wd + sc.c(p, len));
      bounds.pop_back();
    }
  };
  recurse(recurse, 0, k, 0, 0.0);
  require(have_best, Errc::infeasible_k, "no feasible k-step path");

  std::vector<Span> spans;
  std::size_t prev = 0;
  for (std::size_t b : best_bounds) {
    spans.push_back({prev, b});
    prev = b;
  }
  return finish(corpus, table, std::move(spans));
}

std::pair<Segmentation, MergeList> ebpe_train(const Corpus& corpus,
                                              const CountTable& table,
                                              std::size_t k) {
  return greedy_train(corpus, table, k,
                      [&table](const TrainState&, const Merge& m) {
                        return table.count(m.merged);
                      });
}

std::pair<Segmentation, MergeList> bpe_train(const Corpus& corpus,
                                             std::size_t k) {
  const CountTable table = build_count_table(corpus);
  auto pair_frequency = [](const TrainState& st, const Merge& m) {
    std::int64_t freq = 0;
    for (const TrainWord& tw : st.words) {
      std::int64_t in_word = 0;
      for (std::size_t i = 0; i + 1 < tw.tokens.size(); ++i)
        if (tw.tokens[i] == m.left && tw.tokens[i + 1] == m.right) ++in_word;
      freq += in_word * tw.freq;
    }
    return freq;
  };
  return greedy_train(corpus, table, k, pair_frequency);
}

std::vector<std::string> tokenize(std::string_view text,
                                  const MergeList& merges, char eow_mark) {
  const Corpus marked = load_corpus(text, eow_mark);
  TrainState st = init_train_state(marked);
  for (const Merge& m : merges.merges) apply_merge(st, m);
  std::vector<std::string> out;
  for (const std::size_t i : st.occurrence)
    for (const std::string& tok : st.words[i].tokens) out.push_back(tok);
  return out;
}

VocabStats vocab_stats(const Segmentation& seg, const Corpus& corpus,
                       const CountTable& table) {
  VocabStats stats;
  std::map<std::string, std::int64_t> unique;
  for (std::size_t i = 0; i < seg.spans.size(); ++i) {
    const std::string tok = seg.token(corpus, i);
    const std::int64_t count = table.count(tok);
    require(count > 0, Errc::token_not_in_table,
            "token '" + tok + "' has no table entry");
    unique[tok] = count;
  }
  for (auto& [tok, count] : unique) {
    stats.unique_tokens.emplace_back(tok, count);
    stats.n_total += count;
  }
  stats.u = stats.unique_tokens.size();
  return stats;
}

void validate_segmentation(const Corpus& corpus, const Segmentation& seg) {
  const std::size_t n = corpus.total_chars();
  if (n == 0) {
    require(seg.spans.empty(), Errc::shape_mismatch,
            "non-empty segmentation over empty corpus");
    return;
  }
  require(!seg.spans.empty() && seg.spans.front().begin == 0 &&
              seg.spans.back().end == n,
          Errc::shape_mismatch, "segmentation does not cover the corpus");
  std::size_t pos = 0;
  for (const Span& s : seg.spans) {
    require(s.begin == pos && s.end > s.begin, Errc::shape_mismatch,
            "spans must be contiguous and non-empty");
    require(s.end <= corpus.word_end_of(s.begin), Errc::shape_mismatch,
            "span crosses a word boundary");
    pos = s.end;
  }
}

void write_vocab_file(std::ostream& out, const VocabStats& stats) {
  auto rows = stats.unique_tokens;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (std::size_t rank = 0; rank < rows.size(); ++rank)
    out << rows[rank].first << '\t' << rows[rank].second << '\t' << rank
        << '\n';
}

void write_merge_file(std::ostream& out, const MergeList& merges) {
  for (const Merge& m : merges.merges) out << m.left << '\t' << m.right << '\n';
}

MergeList read_merge_file(std::istream& in) {
  MergeList list;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    require(tab != std::string::npos, Errc::config_invalid,
            "merge file line lacks a tab separator");
    Merge m;
    m.left = line.substr(0, tab);
    m.right = line.substr(tab + 1);
    m.merged = m.left + m.right;
    list.merges.push_back(std::move(m));
  }
  return list;
}

}  // namespace lmkit

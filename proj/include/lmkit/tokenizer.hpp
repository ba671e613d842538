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

#ifndef LMKIT_TOKENIZER_HPP
#define LMKIT_TOKENIZER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmkit/corpus.hpp"

namespace lmkit {

// One token as a [begin, end) character span over Corpus.char_seq.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

// An ordered, exact cover of the corpus character sequence by within-word
// spans. `cost` is the path cost: the sum of 1/(count+1) over the tokens.
struct Segmentation {
  std::vector<Span> spans;
  double cost = 0.0;

  std::size_t k() const { return spans.size(); }
  std::string token(const Corpus& corpus, std::size_t i) const {
    return std::string(corpus.span_text(spans[i].begin, spans[i].end));
  }
  std::vector<std::string> token_strings(const Corpus& corpus) const;
};

struct Merge {
  std::string left;
  std::string right;
  std::string merged;
  bool operator==(const Merge&) const = default;
};

struct MergeList {
  std::vector<Merge> merges;
  std::size_t final_k = 0;
};

// Per-step cost 1/(count(token)+1); the +1 guards the zero-appearance case.
double step_cost(const CountTable& table, std::string_view token);

// Total path cost, summed left to right over the spans.
double path_cost(const Segmentation& seg, const Corpus& corpus,
                 const CountTable& table);

// Minimum-cost segmentation with exactly k tokens, found by relaxation over
// the layered position/step DAG (Bellman-Ford on a DAG). Cost comparisons
// use exact scaled-integer arithmetic whenever the common denominator of all
// span costs fits 64 bits (always true at oracle scale); ties prefer the
// lexicographically smallest boundary-position vector.
Segmentation swe_optimal(const Corpus& corpus, const CountTable& table,
                         std::size_t k);

// Exhaustive-enumeration oracle for swe_optimal; same cost model and
// tie-break, restricted to corpora of at most 30 characters.
Segmentation swe_bruteforce(const Corpus& corpus, const CountTable& table,
                            std::size_t k);

// Greedy trainers. Both initialize one token per character and repeatedly
// merge every occurrence of the selected adjacent within-word pair until the
// token count first reaches k or below (the merge-all step may overshoot).
//
// ebpe_train selects the pair whose *merged string* has the highest static
// appearance count; bpe_train selects the pair with the highest frequency in
// the current token sequence. Ties pick the lexicographically smallest
// (merged, left) pair.
std::pair<Segmentation, MergeList> ebpe_train(const Corpus& corpus,
                                              const CountTable& table,
                                              std::size_t k);
std::pair<Segmentation, MergeList> bpe_train(const Corpus& corpus,
                                             std::size_t k);

// Applies a learned merge list to new text: marks and character-initializes
// the words, then replays the merges in recorded order.
std::vector<std::string> tokenize(std::string_view text,
                                  const MergeList& merges, char eow_mark);

VocabStats vocab_stats(const Segmentation& seg, const Corpus& corpus,
                       const CountTable& table);

// Throws unless `seg` is a contiguous, within-word, exact cover of corpus.
void validate_segmentation(const Corpus& corpus, const Segmentation& seg);

// Vocabulary file: one `token<TAB>count<TAB>rank` line per unique token,
// ranked by (count desc, token asc). Merge file: `left<TAB>right` lines in
// application order.
void write_vocab_file(std::ostream& out, const VocabStats& stats);
void write_merge_file(std::ostream& out, const MergeList& merges);
MergeList read_merge_file(std::istream& in);

}  // namespace lmkit

#endif  // LMKIT_TOKENIZER_HPP

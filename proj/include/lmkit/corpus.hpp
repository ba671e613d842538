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

#ifndef LMKIT_CORPUS_HPP
#define LMKIT_CORPUS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmkit/error.hpp"

namespace lmkit {

// A whitespace-split text where every word carries a trailing end-of-word
// mark. Positions everywhere in this project are *character* (code point)
// indices into char_seq; multi-byte UTF-8 sequences count as one character.
struct Corpus {
  std::vector<std::string> words;  // each ends with the end-of-word mark
  std::string char_seq;            // concatenation of all marked words
  std::size_t word_count = 0;
  char eow_mark = '_';

  // Byte offset of each character in char_seq, plus an end sentinel.
  std::vector<std::size_t> char_offsets;
  // Character index where each word starts, plus an end sentinel.
  std::vector<std::size_t> word_char_begin;

  std::size_t total_chars() const { return char_offsets.size() - 1; }

  // End (exclusive character index) of the word containing character `pos`.
  std::size_t word_end_of(std::size_t pos) const;

  // Substring of char_seq spanning characters [begin, end).
  std::string_view span_text(std::size_t begin, std::size_t end) const {
    return std::string_view(char_seq)
        .substr(char_offsets[begin], char_offsets[end] - char_offsets[begin]);
  }
};

// Static substring-occurrence counts: for every substring that lies entirely
// inside one marked word, the total number of (overlapping) occurrences
// across all word occurrences. Lookups of absent strings return 0.
struct CountTable {
  std::unordered_map<std::string, std::int64_t> counts;
  std::size_t total_chars = 0;

  std::int64_t count(std::string_view token) const {
    auto it = counts.find(std::string(token));
    return it == counts.end() ? 0 : it->second;
  }
};

struct VocabStats {
  // token -> appearance count, with a deterministic (sorted) token order.
  std::vector<std::pair<std::string, std::int64_t>> unique_tokens;
  std::int64_t n_total = 0;
  std::size_t u = 0;
};

// Splits `text` on Unicode whitespace runs and appends `eow_mark` to every
// word. Throws EowMarkCollision if the mark occurs in the text and
// InvalidEncoding on malformed UTF-8.
Corpus load_corpus(std::string_view text, char eow_mark = '_');

CountTable build_count_table(const Corpus& corpus);

}  // namespace lmkit

#endif  // LMKIT_CORPUS_HPP

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

#include "lmkit/corpus.hpp"

#include <algorithm>
#include <cstdint>

namespace lmkit {
namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 code point starting at text[i]; advances i past it.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t j) {
    return static_cast<unsigned char>(text[j]);
  };
  const unsigned char b0 = byte(i);
  std::size_t len;
  char32_t cp;
  if (b0 < 0x80) {
    len = 1;
    cp = b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    fail(Errc::invalid_encoding, "bad UTF-8 lead byte");
  }
  require(i + len <= text.size(), Errc::invalid_encoding,
          "truncated UTF-8 sequence");
  for (std::size_t j = 1; j < len; ++j) {
    const unsigned char b = byte(i + j);
    require((b & 0xC0) == 0x80, Errc::invalid_encoding,
            "bad UTF-8 continuation byte");
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings and surrogates.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  require(cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF),
          Errc::invalid_encoding, "invalid code point");
  i += len;
  return cp;
}

}  // namespace

std::size_t Corpus::word_end_of(std::size_t pos) const {
  auto it = std::upper_bound(word_char_begin.begin(), word_char_begin.end(),
                             pos);
  return *it;
}

Corpus load_corpus(std::string_view text, char eow_mark) {
  Corpus corpus;
  corpus.eow_mark = eow_mark;

  std::string current;
  std::size_t i = 0;
  const auto flush_word = [&] {
    if (current.empty()) return;
    current.push_back(eow_mark);
    corpus.words.push_back(std::move(current));
    current.clear();
  };
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = decode_utf8(text, i);
    if (cp == static_cast<char32_t>(static_cast<unsigned char>(eow_mark)))
      fail(Errc::eow_mark_collision,
           "end-of-word mark occurs in the input text");
    if (is_unicode_space(cp)) {
      flush_word();
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  flush_word();
  corpus.word_count = corpus.words.size();

  corpus.word_char_begin.push_back(0);
  std::size_t char_index = 0;
  for (const std::string& word : corpus.words) {
    std::size_t j = 0;
    while (j < word.size()) {
      corpus.char_offsets.push_back(corpus.char_seq.size() + j);
      decode_utf8(word, j);
      ++char_index;
    }
    corpus.char_seq += word;
    corpus.word_char_begin.push_back(char_index);
  }
  corpus.char_offsets.push_back(corpus.char_seq.size());
  return corpus;
}

CountTable build_count_table(const Corpus& corpus) {
  CountTable table;
  table.total_chars = corpus.total_chars();

  // Enumerate intra-word substrings of each distinct word once and scale by
  // word frequency; overlapping occurrences contribute individually.
  std::unordered_map<std::string, std::int64_t> word_freq;
  for (const std::string& word : corpus.words) ++word_freq[word];

  for (const auto& [word, freq] : word_freq) {
    // Character boundaries within this word.
    std::vector<std::size_t> bounds;
    std::size_t j = 0;
    while (j < word.size()) {
      bounds.push_back(j);
      std::size_t k = j;
      decode_utf8(word, k);
      j = k;
    }
    bounds.push_back(word.size());
    for (std::size_t a = 0; a + 1 < bounds.size(); ++a)
      for (std::size_t b = a + 1; b < bounds.size(); ++b)
        table.counts[word.substr(bounds[a], bounds[b] - bounds[a])] += freq;
  }
  return table;
}

}  // namespace lmkit

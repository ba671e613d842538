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

#ifndef LMKIT_ERROR_HPP
#define LMKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lmkit {

// Domain error classes. The CLI maps these to exit code 1 and names them
// in the emitted report; usage problems are a separate class (exit code 2).
enum class Errc {
  eow_mark_collision,
  invalid_encoding,
  token_not_in_table,
  infeasible_k,
  too_large,
  empty_scores,
  no_elite_samples,
  zero_mass,
  range_empty,
  config_invalid,
  corpus_too_small,
  vocab_empty,
  odd_dimension,
  shape_mismatch,
  distance_out_of_range,
  index_out_of_range,
  empty_probs,
  group_size_mismatch,
  dimension_mismatch,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace lmkit

#endif  // LMKIT_ERROR_HPP

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

#include "lmkit/error.hpp"

namespace lmkit {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::eow_mark_collision: return "EowMarkCollision";
    case Errc::invalid_encoding: return "InvalidEncoding";
    case Errc::token_not_in_table: return "TokenNotInTable";
    case Errc::infeasible_k: return "InfeasibleK";
    case Errc::too_large: return "TooLarge";
    case Errc::empty_scores: return "EmptyScores";
    case Errc::no_elite_samples: return "NoEliteSamples";
    case Errc::zero_mass: return "ZeroMass";
    case Errc::range_empty: return "RangeEmpty";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::corpus_too_small: return "CorpusTooSmall";
    case Errc::vocab_empty: return "VocabEmpty";
    case Errc::odd_dimension: return "OddDimension";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::distance_out_of_range: return "DistanceOutOfRange";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::empty_probs: return "EmptyProbs";
    case Errc::group_size_mismatch: return "GroupSizeMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
  }
  return "UnknownError";
}

}  // namespace lmkit

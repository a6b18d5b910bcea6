// core/include/fac/embeddings.hpp

// Copyright 2026  fac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FAC_EMBEDDINGS_HPP_
#define FAC_EMBEDDINGS_HPP_

#include <string>

#include "fac/frame_sequence.hpp"

namespace fac {

/// Voice identity vector from a speaker encoder.
struct SpeakerEmbedding {
  Vector vector;
  std::string source_utterance_id;
};

/// Utterance-level prosody summary from the reference encoder.
struct ProsodyEmbedding {
  Vector vector;
};

}  // namespace fac

#endif  // FAC_EMBEDDINGS_HPP_

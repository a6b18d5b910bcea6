// core/include/fac/parameters.hpp

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

#ifndef FAC_PARAMETERS_HPP_
#define FAC_PARAMETERS_HPP_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "fac/frame_sequence.hpp"

namespace fac::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value once touched by backward or zero_grad
};

/// Named parameters in insertion order. References returned by add() stay
/// valid for the lifetime of the set.
class ParameterSet {
 public:
  Parameter &add(const std::string &name, Matrix init);
  Parameter &at(const std::string &name);
  const Parameter &at(const std::string &name) const;
  bool contains(const std::string &name) const;

  size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  Index num_scalars() const;
  std::deque<Parameter> &items() { return params_; }
  const std::deque<Parameter> &items() const { return params_; }

  void zero_grad();
  /// FNV-1a over names, shapes and value bytes.
  uint64_t checksum() const;
  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix> &values);

  /// Binary blob: count, then per parameter (name, rows, cols, f64 data).
  void save(const std::filesystem::path &path) const;
  /// Loads values into already-declared parameters; names and shapes must
  /// match exactly.
  void load(const std::filesystem::path &path);

 private:
  std::deque<Parameter> params_;
};

}  // namespace fac::nn

#endif  // FAC_PARAMETERS_HPP_

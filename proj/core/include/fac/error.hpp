// core/include/fac/error.hpp

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

#ifndef FAC_ERROR_HPP_
#define FAC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fac {

/// Base class of every error raised by the library. The kind() string is
/// stable and is what the CLI and reports print next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string &kind() const { return kind_; }

 private:
  std::string kind_;
};

#define FAC_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string &what) : Error(tag, what) {}     \
  };

FAC_DEFINE_ERROR(IoError, "io")
FAC_DEFINE_ERROR(ParseError, "parse")
FAC_DEFINE_ERROR(ValidationError, "validation")
FAC_DEFINE_ERROR(ShapeError, "shape")
FAC_DEFINE_ERROR(StateError, "state")
FAC_DEFINE_ERROR(NotFoundError, "not-found")
FAC_DEFINE_ERROR(AmbiguityError, "ambiguity")
FAC_DEFINE_ERROR(IntegrityError, "integrity")
FAC_DEFINE_ERROR(DivergenceError, "divergence")
FAC_DEFINE_ERROR(WiringError, "wiring")
FAC_DEFINE_ERROR(ConfigError, "config")

#undef FAC_DEFINE_ERROR

/// Wraps a failure raised inside a pluggable provider, keeping the provider
/// id and the caller's context (utterance id, pipeline branch).
class ProviderError : public Error {
 public:
  ProviderError(std::string provider_id, std::string context,
                const std::string &cause);
  const std::string &provider_id() const { return provider_id_; }
  const std::string &context() const { return context_; }

 private:
  std::string provider_id_;
  std::string context_;
};

}  // namespace fac

#endif  // FAC_ERROR_HPP_

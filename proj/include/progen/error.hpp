/**
 * Copyright 2026 the progen authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PROGEN_ERROR_HPP
#define PROGEN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace progen {

enum class Errc {
  InvalidArgument,
  Io,
  Parse,
  Config,
  DuplicateId,
  EmptyCorpus,
  EmptyInput,
  WordNotInDocument,
  WordNotInCorpus,
  MissingPool,
  UnknownSymbol,
  CorruptModel,
  KindMismatch,
  StaleArtifact,
  MissingCondition,
  DimMismatch,
  Internal,
};

const char* errc_name(Errc c);

/// Library-wide exception type; carries a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, Errc code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace progen

#endif

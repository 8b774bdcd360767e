// Copyright 2026 The SliceRank Authors.
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

#ifndef SLICERANK_ERROR_H_
#define SLICERANK_ERROR_H_

#include <stdexcept>
#include <string>

namespace slicerank {

// Broad failure classes. The CLI maps them onto exit codes 1 (validation),
// 2 (I/O) and 3 (provider); kNotFound is reported as validation.
enum class ErrorKind { kValidation, kIo, kProvider, kNotFound };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& message) {
  return Error(ErrorKind::kValidation, message);
}
inline Error IoError(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}
inline Error ProviderError(const std::string& message) {
  return Error(ErrorKind::kProvider, message);
}
inline Error NotFoundError(const std::string& message) {
  return Error(ErrorKind::kNotFound, message);
}

}  // namespace slicerank

#endif  // SLICERANK_ERROR_H_

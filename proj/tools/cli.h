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

#ifndef SLICERANK_TOOLS_CLI_H_
#define SLICERANK_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace slicerank::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitProvider = 3;

// `args` excludes the program name. `serve` blocks until SIGINT or SIGTERM;
// SIGHUP reloads the snapshot from the same paths.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slicerank::cli

#endif  // SLICERANK_TOOLS_CLI_H_

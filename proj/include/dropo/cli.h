// Copyright 2026 The dropo Authors
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

#ifndef DROPO_CLI_H_
#define DROPO_CLI_H_

#include <iosfwd>

namespace dropo {

inline constexpr const char* kToolName = "dropo";
inline constexpr const char* kToolVersion = "0.1.0";

// process exit statuses
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,        // bad arguments, config or files
  kExitUnreachable = 2,  // no epsilon candidate met tau
  kExitNumerical = 3,    // factorization or objective failure
};

// entry point behind the `dropo` binary; subcommands gen, preprocess, fit,
// tune-epsilon and replay
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace dropo

#endif  // DROPO_CLI_H_

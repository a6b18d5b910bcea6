// tools/include/fac/cli.hpp

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

#ifndef FAC_CLI_HPP_
#define FAC_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fac::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts_written;
  std::string summary;
};

/// argv without the program name, e.g. {"train-am", "--config", "c.json"}.
CommandResult run(const std::vector<std::string> &args, std::ostream &out,
                  std::ostream &err);
CommandResult run(const std::vector<std::string> &args);

}  // namespace fac::cli

#endif  // FAC_CLI_HPP_

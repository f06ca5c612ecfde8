// Copyright 2026 The Scrub Authors.
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

#ifndef SCRUB_TOOLS_CLI_COMMANDS_H_
#define SCRUB_TOOLS_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace scrub::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitBackend = 3,
  kExitStale = 4,
};

// Parses the arguments (without the program name), runs one subcommand and
// maps errors to exit codes. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int run(int argc, char** argv);

}  // namespace scrub::cli

#endif  // SCRUB_TOOLS_CLI_COMMANDS_H_

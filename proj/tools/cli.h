// Copyright 2026 The spatialq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPATIALQ_TOOLS_CLI_H_
#define SPATIALQ_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace spatialq {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Entry point of the `spatialq` tool. `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace spatialq

#endif  // SPATIALQ_TOOLS_CLI_H_

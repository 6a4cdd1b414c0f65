// Copyright 2026 The privmdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: estimate, run and sweep over a JSON config.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "privmdp/error.h"
#include "privmdp/pipeline.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int ExitCodeFor(privmdp::ErrorKind kind) {
  switch (kind) {
    case privmdp::ErrorKind::kConfig:
    case privmdp::ErrorKind::kInvalidArgument:
      return kExitConfig;
    case privmdp::ErrorKind::kData:
      return kExitData;
    case privmdp::ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitNumerical;
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void AddCommonOptions(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--out", opts.out, "Override the output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private demand-response dispatch for load ensembles"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate the default transition matrix");
  CLI::App* run = app.add_subcommand("run", "Solve, privatize and report one configuration");
  CLI::App* sweep = app.add_subcommand("sweep", "Cost and capacity across k for every method");
  for (CLI::App* cmd : {estimate, run, sweep}) AddCommonOptions(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    privmdp::RunConfig config = privmdp::LoadRunConfig(opts.config);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.out) config.output_dir = *opts.out;
    if (estimate->parsed()) return privmdp::CmdEstimate(config, std::cout);
    if (run->parsed()) return privmdp::CmdRun(config, std::cout);
    return privmdp::CmdSweep(config, std::cout);
  } catch (const privmdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

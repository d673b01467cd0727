// Copyright 2026 The qvlab Authors
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

// Runs the acceptance criteria and prints one verdict line per criterion.
// Exit status is the number of failed criteria (capped at 100).

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qvlab/acceptance.hpp"

int main(int argc, char** argv) {
  qvlab::AcceptanceOptions opt;
  std::string suite = "all";
  bool serial = false;
  CLI::App app{"qvlab acceptance criteria"};
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--scale", opt.scale, "replicate multiplier (1 = documented sizes)")->check(CLI::PositiveNumber);
  app.add_option("--suite", suite, "suite name or comma-separated criterion ids");
  app.add_flag("--serial", serial, "run replicates on one thread");
  CLI11_PARSE(app, argc, argv);
  opt.execution = serial ? qvlab::Execution::serial : qvlab::Execution::parallel;
  try {
    opt.only = qvlab::suite_criteria(suite);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  int failed = 0, total = 0;
  qvlab::run_acceptance(opt, [&](const qvlab::CriterionResult& r) {
    std::cout << r.line() << std::endl;
    if (r.id > 0) {
      ++total;
      failed += !r.pass;
    }
  });
  std::cout << (total - failed) << "/" << total << " criteria passed" << std::endl;
  return failed > 100 ? 100 : failed;
}

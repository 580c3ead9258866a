// Copyright 2026 The sepdec Authors
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


#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sepdec/cli.hpp"

int main(int argc, char** argv) {
  using namespace sepdec::cli;

  CLI::App app{"sepdec: bipartite separability analysis and explicit decompositions"};
  app.require_subcommand(1);

  std::string family;
  std::string t_text;
  std::string output;
  std::string input;
  std::string state_path;
  std::string dec_path;
  std::uint64_t seed = 0;
  int budget = 20000;
  double tol = 1e-9;
  AnalyzeOptions analyze;

  auto* example = app.add_subcommand("example", "write a state from one of the built-in families");
  example->add_option("--family", family, "2x4, octahedral or tetrahedral")->required();
  example->add_option("--t", t_text, "coupling triple t1,t2,t3")->required();
  example->add_option("--output", output, "state file to write (stdout if omitted)");

  auto* an = app.add_subcommand("analyze", "run separability criteria on a state");
  an->add_option("--input", input, "state file")->required();
  an->add_option("--criteria", analyze.criteria,
                 "all, ppt, norms, corollary2, symmetry or observation1");
  an->add_option("--seed", seed, "random seed");
  an->add_option("--budget", budget, "objective evaluations for the decomposition attempt");
  an->add_option("--tol", tol, "reconstruction tolerance");
  an->add_option("--sum-restarts", analyze.sum_restarts, "restarts of the sum-bound oracle");
  an->add_option("--product-restarts", analyze.product_restarts,
                 "restarts of the product-bound oracle");

  auto* dec = app.add_subcommand("decompose", "construct an explicit separable decomposition");
  dec->add_option("--input", input, "state file")->required();
  dec->add_option("--output", output, "decomposition file to write");
  dec->add_option("--seed", seed, "random seed");
  dec->add_option("--budget", budget, "maximum objective evaluations");
  dec->add_option("--tol", tol, "reconstruction tolerance");

  auto* ver = app.add_subcommand("verify", "check a decomposition against a state");
  auto* state_opt = ver->add_option("--state,--input", state_path, "state file")->required();
  ver->add_option("--decomposition", dec_path, "decomposition file")->required();
  ver->add_option("--tol", tol, "reconstruction tolerance");
  (void)state_opt;

  auto* bl = app.add_subcommand("bloch", "print the Bloch representation of a state");
  bl->add_option("--input", input, "state file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kParse;
  }

  if (example->parsed()) return cmd_example(family, t_text, output, std::cout, std::cerr);
  if (an->parsed()) {
    analyze.seed = seed;
    analyze.budget = budget;
    analyze.tol = tol;
    return cmd_analyze(input, analyze, std::cout, std::cerr);
  }
  if (dec->parsed()) return cmd_decompose(input, output, seed, budget, tol, std::cout, std::cerr);
  if (ver->parsed()) return cmd_verify(state_path, dec_path, tol, std::cout, std::cerr);
  if (bl->parsed()) return cmd_bloch(input, std::cout, std::cerr);
  return kParse;
}

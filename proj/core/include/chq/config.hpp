#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chq/ansatz.hpp"
#include "chq/potential.hpp"
#include "chq/riesz.hpp"
#include "chq/solver.hpp"

namespace chq {

// Run configuration: sectioned key = value text with numbers and quoted
// strings. Unknown sections or keys are hard errors; validation reports every
// violation, not only the first.
struct RunConfig {
  int N = 3;
  double alpha = 2.0;
  double p = 2.0;
  PotentialSpec potential = PotentialSpec::cosine(10.0, 30.0);

  int M = 4;
  int s = 8;

  // "default", "matched", or a numeric literal carried as text.
  std::string zero_mode = "default";

  SolverOptions solver;
  CutoffSpec cutoff;

  std::vector<double> schedule_fractions = {0.4, 0.2, 0.1, 0.05};

  std::string out_dir = ".";
  std::uint64_t seed = 1;

  std::string raw_text;  // exact file contents, input of the hash
  std::string hash;      // FNV-1a 64 of raw_text, hex
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

TorusGrid config_grid(const RunConfig& c);
Field config_potential(const RunConfig& c);
RieszParams config_riesz(const RunConfig& c);
NonlocalParams config_nonlocal(const RunConfig& c);

}  // namespace chq

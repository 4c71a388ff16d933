#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rotor::cli {

struct RunConfig {
  std::string command;  // solve | run | verify | z2 | transfinite | stack | render
  std::string chain_path;
  std::string order = "id";  // id | shuffled
  std::string r0 = "zero";   // zero | random
  std::string start, a, b, c;
  std::uint64_t horizon = 10000;
  std::uint64_t hits = 500;
  int theorem = 0;
  bool time_dependent = false;
  std::string what = "h";
  std::string family = "line";
  std::uint64_t excursions = 2000;
  std::uint64_t d0 = 4;
  std::uint64_t d_max = 1 << 16;
  std::uint64_t max_steps = 500000000ULL;
  std::uint64_t random = 0;  // size of a seeded random suite
  unsigned orders = 3;
  std::string probs;
  std::uint64_t periods = 1;
  std::string config = "sectors";
  std::int64_t box = 0;  // 0: choose from the run
  std::string csv_out, render_out, snapshot_out;
  std::uint64_t seed = 1;
  std::string help;  // set when --help was asked for
};

/// Arguments without the program name. Throws UsageError naming the flag.
RunConfig parse_config(const std::vector<std::string>& args);

/// 0 all bounds hold, 1 violation (row echoed to err), 2 usage or
/// configuration error, 3 undecided escape.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rotor::cli

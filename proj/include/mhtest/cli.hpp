#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mhtest {

inline constexpr const char* kToolName = "mhtest";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitNumeric = 3, kExitResource = 4 };

// Evenly spaced points a, ..., b; written a:b:steps on the command line.
struct Grid {
  double a = 0.0;
  double b = 0.0;
  int steps = 1;

  // Throws InvalidArgument on malformed text or steps < 1.
  static Grid parse(const std::string& text);
  std::vector<double> points() const;
  std::string str() const;
};

struct RunConfig {
  std::string command;
  std::string p_path;
  std::string q_path;
  int n = 100;
  std::optional<Grid> lambda_grid;  // default: the full admissible range, 21 points
  std::optional<Grid> r_grid;       // default: (0, E(Q||P)], 20 points
  double eps = 0.1;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  bool oracle = false;
  bool monte_carlo = false;
  std::string out;
  std::string format = "csv";
  std::uint64_t max_types = 50'000'000;
  double tol = 1e-12;
  std::string trajectory;

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  nlohmann::json to_json() const;
};

// Each command reads the distributions named in the config, writes its
// artifact to config.out (or to out when empty) and returns an exit code.
// Diagnostics go to err.
int cmd_project(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_tradeoff(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_exponents(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve_lambda(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_second_order(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mhtest

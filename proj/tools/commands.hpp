#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsp::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kMalformedInput = 1,
  kDivergence = 2,
  kIoFailure = 3,
  kCheckFailed = 4,
};

// Runs `nsp <args...>` (args excludes the program name). Reports go to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SolveOptions {
  std::string problem;
  std::string out;
  std::string dual;
  std::string trace;
  std::size_t max_iter = 1000;
  double fp_tol = 0.0;
};
int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);

struct DenoiseOptions {
  std::string image;
  std::string out;
  double lambda = 0.0;
  bool calibrate = false;
  double noise_frac = 0.0;
  std::size_t max_iter = 20000;
  double fp_tol = 1e-9;
};
int cmd_denoise(const DenoiseOptions& opt, std::ostream& out, std::ostream& err);

struct BenchOptions {
  std::string family;
  std::size_t rows = 0;  // 0 picks the family default
  std::size_t cols = 0;
  std::size_t rays = 60;
  double noise_frac = 0.1;
  double lambda = 0.0;   // 0 picks 0.1 * lambda_scale
  std::uint64_t seed = 7;
  std::size_t max_iter = 1000;
  std::string out;       // stdout when empty
};
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);

struct CheckOptions {
  std::uint64_t seed = 1;
  std::string out;  // stdout when empty
  // Testing only: multiplies tau in the monotonicity run.
  double inject_step_factor = 1.0;
};
int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace nsp::cli

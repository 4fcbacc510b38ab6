#include "commands.hpp"
#include "guard.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "nsp/error.hpp"
#include "nsp/io.hpp"
#include "nsp/problems.hpp"

namespace nsp::cli {
namespace {

void print_summary(std::ostream& out, const Problem& problem, const SolverResult& r) {
  out << "objective " << io::format_real(objective(problem, r.x)) << '\n'
      << "fp_residual " << io::format_real(r.final_fp_residual) << '\n'
      << "iterations " << r.iterations << '\n'
      << "converged " << (r.converged ? "true" : "false") << '\n';
}

GridShape image_shape(const io::Image& img) {
  if (img.rows == 1) return Shape1D{img.cols};
  if (img.cols == 1) return Shape1D{img.rows};
  return Shape2D{img.rows, img.cols};
}

}  // namespace

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.max_iter < 1) throw InvalidArgument("--max-iter must be at least 1");
    if (!(opt.fp_tol >= 0.0)) throw InvalidArgument("--fp-tol must be non-negative");
    const Problem problem = io::read_problem(opt.problem);
    SolverConfig config = make_config(problem, opt.max_iter, opt.fp_tol);
    config.record_trace = !opt.trace.empty();
    const SolverResult r = lv_solve(problem, config);

    io::write_vector(opt.out, r.x);
    if (!opt.dual.empty()) io::write_vector(opt.dual, r.w);
    if (!opt.trace.empty()) {
      std::ofstream t(opt.trace);
      if (!t) throw IoError("cannot open '" + opt.trace + "' for writing");
      io::write_trace_csv(t, *r.trace);
      if (!t) throw IoError("write to '" + opt.trace + "' failed");
    }
    print_summary(out, problem, r);
    return int{kOk};
  });
}

int cmd_denoise(const DenoiseOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.max_iter < 1) throw InvalidArgument("--max-iter must be at least 1");
    if (!(opt.lambda >= 0.0)) throw InvalidArgument("--lambda must be non-negative");
    if (opt.calibrate && !(opt.noise_frac > 0.0)) throw InvalidArgument("--calibrate needs --noise-frac > 0");
    const io::Image input = io::read_pgm(opt.image);
    io::Image output = input;

    if (input.pixels.size() < 2 || (!opt.calibrate && opt.lambda == 0.0)) {
      // Nothing to regularize: the minimizer is the input itself.
      out << "lambda 0\n";
      io::write_pgm(opt.out, output);
      return int{kOk};
    }

    const GridShape shape = image_shape(input);
    const Vec& g = input.pixels;
    if (opt.calibrate) {
      // g = clean + noise with ||noise|| = f ||clean|| and noise roughly
      // orthogonal to clean, so ||noise|| ~ f ||g|| / sqrt(1 + f^2).
      const double target = opt.noise_frac * g.norm() / std::sqrt(1.0 + opt.noise_frac * opt.noise_frac);
      CalibrationOptions copt;
      copt.max_iter = opt.max_iter;
      copt.fp_tol = opt.fp_tol;
      if (opt.lambda > 0.0) copt.lambda_init = opt.lambda;
      const CalibrationResult c =
          calibrate_lambda([&](double lambda) { return make_tv_denoise(g, lambda, shape); }, target, copt);
      output.pixels = c.solution.x;
      out << "lambda " << io::format_real(c.lambda) << '\n'
          << "target_residual " << io::format_real(target) << '\n'
          << "residual " << io::format_real(c.residual) << '\n';
      print_summary(out, make_tv_denoise(g, c.lambda, shape), c.solution);
    } else {
      const Problem problem = make_tv_denoise(g, opt.lambda, shape);
      const SolverResult r = lv_solve(problem, make_config(problem, opt.max_iter, opt.fp_tol));
      output.pixels = r.x;
      out << "lambda " << io::format_real(opt.lambda) << '\n';
      print_summary(out, problem, r);
    }
    io::write_pgm(opt.out, output);
    return int{kOk};
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Primal-dual solver for l1-type penalized least squares"};
  app.name("nsp");
  app.require_subcommand(1);

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Solve a problem file");
  s->add_option("--problem", solve.problem, "Problem JSON file")->required();
  s->add_option("--out", solve.out, "Solution vector file")->required();
  s->add_option("--dual", solve.dual, "Dual vector file");
  s->add_option("--trace", solve.trace, "Per-iteration CSV trace");
  s->add_option("--max-iter", solve.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  s->add_option("--fp-tol", solve.fp_tol, "Stop once the fixed-point residual is below this")
      ->check(CLI::NonNegativeNumber);

  DenoiseOptions denoise;
  auto* d = app.add_subcommand("denoise", "Total-variation denoising of a PGM image");
  d->add_option("--image", denoise.image, "Input PGM")->required();
  d->add_option("--out", denoise.out, "Output PGM")->required();
  d->add_option("--lambda", denoise.lambda, "Penalty weight (initial guess with --calibrate)")
      ->check(CLI::NonNegativeNumber);
  d->add_flag("--calibrate", denoise.calibrate, "Pick lambda so the residual matches the noise level");
  d->add_option("--noise-frac", denoise.noise_frac, "Noise level relative to the clean image norm")
      ->check(CLI::PositiveNumber);
  d->add_option("--max-iter", denoise.max_iter, "Iteration limit per solve")->check(CLI::PositiveNumber);
  d->add_option("--fp-tol", denoise.fp_tol, "Fixed-point tolerance per solve")->check(CLI::NonNegativeNumber);

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Run the solver and its baselines on a generated problem");
  b->add_option("--family", bench.family, "tv-tomography | lasso | denoise | group")
      ->required()
      ->check(CLI::IsMember({"tv-tomography", "lasso", "denoise", "group"}));
  b->add_option("--rows", bench.rows, "Rows (image height or measurements)");
  b->add_option("--cols", bench.cols, "Columns (image width or unknowns)");
  b->add_option("--rays", bench.rays, "Rays for tv-tomography")->check(CLI::PositiveNumber);
  b->add_option("--noise-frac", bench.noise_frac, "Relative noise level")->check(CLI::NonNegativeNumber);
  b->add_option("--lambda", bench.lambda, "Penalty weight (default 0.1 of the zero-solution threshold)")
      ->check(CLI::NonNegativeNumber);
  b->add_option("--seed", bench.seed, "Generator seed");
  b->add_option("--max-iter", bench.max_iter, "Iterations per algorithm")->check(CLI::PositiveNumber);
  b->add_option("--out", bench.out, "CSV output file (default stdout)");

  CheckOptions check;
  auto* c = app.add_subcommand("check", "Verify the convergence theory on built-in problems");
  c->add_option("--seed", check.seed, "Generator seed");
  c->add_option("--out", check.out, "JSON report file (default stdout)");
  c->add_option("--inject-step-factor", check.inject_step_factor)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  }

  if (s->parsed()) return cmd_solve(solve, out, err);
  if (d->parsed()) return cmd_denoise(denoise, out, err);
  if (b->parsed()) return cmd_bench(bench, out, err);
  return cmd_check(check, out, err);
}

}  // namespace nsp::cli

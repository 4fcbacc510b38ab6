#pragma once

// File formats used by the command-line tool.
//
//   vector   one real per line
//   dense    CSV, one matrix row per line
//   sparse   text triplets "i j value", 0-based
//   image    PGM, P2 (ASCII) or P5 (binary)
//   problem  JSON document, see docs in README.md
//   trace    CSV with columns n,objective,fp_residual,dx_norm,dw_norm
//
// Reals are written with 17 significant digits so that reading them back
// reproduces the same doubles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsp/solver.hpp"

namespace nsp::io {

std::string format_real(double v);

Vec read_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, const Vec& v);

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major
};
DenseMatrix read_dense_csv(const std::filesystem::path& path);
void write_dense_csv(const std::filesystem::path& path, const DenseMatrix& m);

std::vector<Triplet> read_triplets(const std::filesystem::path& path);
void write_triplets(const std::filesystem::path& path, const std::vector<Triplet>& triplets);

struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int maxval = 255;
  Vec pixels;  // row-major, in [0, maxval]
};
Image read_pgm(const std::filesystem::path& path);
// Pixels are rounded and clamped to [0, maxval] here and nowhere else.
void write_pgm(const std::filesystem::path& path, const Image& image, bool binary = true);

// Relative "path" entries resolve against base_dir.
LinearOp operator_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json operator_to_json(const LinearOp& op);

Problem problem_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json problem_to_json(const Problem& problem);

Problem read_problem(const std::filesystem::path& path);
void write_problem(const std::filesystem::path& path, const Problem& problem);

void write_trace_csv(std::ostream& out, const SolverTrace& trace);

}  // namespace nsp::io

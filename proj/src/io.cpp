#include "nsp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nsp/error.hpp"

namespace nsp::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_real(const std::string& token, const fs::path& path, std::size_t line_no) {
  // strtod rather than stod: subnormals set ERANGE but are valid values.
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(token.c_str(), &end);
  const auto used = static_cast<std::size_t>(end - token.c_str());
  if (used == 0 || used != token.size() || (errno == ERANGE && std::isinf(v))) {
    throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": '" + token + "' is not a number");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Vec read_vector(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    values.push_back(parse_real(trim(line), path, line_no));
  }
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_vector(const fs::path& path, const Vec& v) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << '\n';
  finish(out, path);
}

DenseMatrix read_dense_csv(const fs::path& path) {
  auto in = open_in(path);
  DenseMatrix m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      m.entries.push_back(parse_real(trim(cell), path, line_no));
      ++count;
    }
    if (m.rows == 0) {
      m.cols = count;
    } else if (count != m.cols) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(m.cols) + " columns, got " + std::to_string(count));
    }
    ++m.rows;
  }
  return m;
}

void write_dense_csv(const fs::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j > 0) out << ',';
      out << format_real(m.entries[i * m.cols + j]);
    }
    out << '\n';
  }
  finish(out, path);
}

std::vector<Triplet> read_triplets(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Triplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::stringstream ss(line);
    std::string si, sj, sv, extra;
    if (!(ss >> si >> sj >> sv) || (ss >> extra)) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected 'i j value'");
    }
    const double fi = parse_real(si, path, line_no);
    const double fj = parse_real(sj, path, line_no);
    if (fi < 0 || fj < 0 || fi != std::floor(fi) || fj != std::floor(fj)) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": indices must be non-negative integers");
    }
    out.push_back({static_cast<std::size_t>(fi), static_cast<std::size_t>(fj), parse_real(sv, path, line_no)});
  }
  return out;
}

void write_triplets(const fs::path& path, const std::vector<Triplet>& triplets) {
  auto out = open_out(path);
  for (const auto& t : triplets) out << t.row << ' ' << t.col << ' ' << format_real(t.value) << '\n';
  finish(out, path);
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  while (true) {
    int c = in.get();
    if (c == EOF) throw InvalidArgument(path.string() + ": truncated PGM header");
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
}

std::size_t pgm_number(std::istream& in, const fs::path& path) {
  const std::string tok = pgm_token(in, path);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw InvalidArgument(path.string() + ": bad PGM header field '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

Image read_pgm(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::string magic = pgm_token(in, path);
  if (magic != "P2" && magic != "P5") throw InvalidArgument(path.string() + ": not a PGM file (magic " + magic + ")");
  Image img;
  img.cols = pgm_number(in, path);
  img.rows = pgm_number(in, path);
  const std::size_t maxval = pgm_number(in, path);
  if (img.rows == 0 || img.cols == 0 || maxval == 0 || maxval > 65535) {
    throw InvalidArgument(path.string() + ": bad PGM dimensions or maxval");
  }
  img.maxval = static_cast<int>(maxval);
  const std::size_t n = img.rows * img.cols;
  img.pixels.resize(static_cast<Eigen::Index>(n));
  if (magic == "P2") {
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t v = 0;
      if (!(in >> v)) throw InvalidArgument(path.string() + ": truncated PGM data");
      img.pixels[static_cast<Eigen::Index>(k)] = static_cast<double>(v);
    }
  } else {
    const bool wide = maxval > 255;
    for (std::size_t k = 0; k < n; ++k) {
      int hi = in.get();
      if (hi == EOF) throw InvalidArgument(path.string() + ": truncated PGM data");
      int v = hi;
      if (wide) {
        const int lo = in.get();
        if (lo == EOF) throw InvalidArgument(path.string() + ": truncated PGM data");
        v = (hi << 8) | lo;
      }
      img.pixels[static_cast<Eigen::Index>(k)] = static_cast<double>(v);
    }
  }
  return img;
}

void write_pgm(const fs::path& path, const Image& image, bool binary) {
  check_size("write_pgm: pixels", image.rows * image.cols, static_cast<std::size_t>(image.pixels.size()));
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << (binary ? "P5" : "P2") << '\n' << image.cols << ' ' << image.rows << '\n' << image.maxval << '\n';
  const bool wide = image.maxval > 255;
  for (Eigen::Index k = 0; k < image.pixels.size(); ++k) {
    const double clamped = std::clamp(std::round(image.pixels[k]), 0.0, static_cast<double>(image.maxval));
    const int v = static_cast<int>(clamped);
    if (binary) {
      if (wide) out.put(static_cast<char>((v >> 8) & 0xff));
      out.put(static_cast<char>(v & 0xff));
    } else {
      out << v << (((k + 1) % static_cast<Eigen::Index>(image.cols) == 0) ? '\n' : ' ');
    }
  }
  finish(out, path);
}

namespace {

fs::path resolve(const std::string& p, const fs::path& base_dir) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

BlockLayout layout_from_json(const json& j, std::size_t out_dim) {
  if (j.is_number_unsigned()) return BlockLayout::uniform(out_dim, j.get<std::size_t>());
  if (j.is_array()) {
    const auto sizes = j.get<std::vector<std::size_t>>();
    return BlockLayout::from_sizes(sizes);
  }
  throw InvalidArgument("problem: 'blocks' must be a block dimension or a list of block sizes");
}

std::size_t require_size(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw InvalidArgument(std::string("operator: missing or non-integer field '") + key + "'");
  }
  return j.at(key).get<std::size_t>();
}

Vec vector_from_json(const json& j, const fs::path& base_dir) {
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (j.is_object() && j.contains("path")) return read_vector(resolve(j.at("path").get<std::string>(), base_dir));
  throw InvalidArgument("problem: 'y' must be an array or {\"path\": ...}");
}

}  // namespace

LinearOp operator_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object() || !j.contains("type")) throw InvalidArgument("operator: expected an object with a 'type'");
  const auto type = j.at("type").get<std::string>();
  std::optional<LinearOp> op;
  if (type == "identity") {
    op = make_identity(require_size(j, "n"));
  } else if (type == "dense") {
    if (j.contains("path")) {
      const DenseMatrix m = read_dense_csv(resolve(j.at("path").get<std::string>(), base_dir));
      if (j.contains("rows")) check_size("dense operator: rows", require_size(j, "rows"), m.rows);
      if (j.contains("cols")) check_size("dense operator: cols", require_size(j, "cols"), m.cols);
      op = make_dense(m.rows, m.cols, m.entries);
    } else {
      const auto data = j.at("data").get<std::vector<double>>();
      op = make_dense(require_size(j, "rows"), require_size(j, "cols"), data);
    }
  } else if (type == "sparse") {
    std::vector<Triplet> t;
    if (j.contains("path")) {
      t = read_triplets(resolve(j.at("path").get<std::string>(), base_dir));
    } else {
      for (const auto& e : j.at("triplets")) {
        if (!e.is_array() || e.size() != 3) throw InvalidArgument("sparse operator: triplets must be [i, j, value]");
        t.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
      }
    }
    op = make_sparse(require_size(j, "rows"), require_size(j, "cols"), t);
  } else if (type == "gradient") {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() == 1) {
      op = make_gradient(Shape1D{shape[0]});
    } else if (shape.size() == 2) {
      op = make_gradient(Shape2D{shape[0], shape[1]});
    } else {
      throw InvalidArgument("gradient operator: shape must have 1 or 2 entries");
    }
  } else if (type == "groups") {
    op = make_group_selector(j.at("groups").get<std::vector<std::vector<std::size_t>>>(), require_size(j, "in_dim"));
  } else if (type == "scaled") {
    op = make_scaled(operator_from_json(j.at("inner"), base_dir), j.at("factor").get<double>());
  } else {
    throw InvalidArgument("operator: unknown type '" + type + "'");
  }
  if (j.contains("blocks")) op = op->with_blocks(layout_from_json(j.at("blocks"), op->out_dim()));
  return *op;
}

json operator_to_json(const LinearOp& op) {
  json j;
  switch (op.kind()) {
    case OpKind::identity:
      j = {{"type", "identity"}, {"n", op.in_dim()}};
      break;
    case OpKind::dense: {
      const auto e = op.dense_entries();
      j = {{"type", "dense"}, {"rows", op.out_dim()}, {"cols", op.in_dim()}, {"data", std::vector<double>(e.begin(), e.end())}};
      break;
    }
    case OpKind::sparse: {
      json t = json::array();
      for (const auto& e : op.sparse_triplets()) t.push_back({e.row, e.col, e.value});
      j = {{"type", "sparse"}, {"rows", op.out_dim()}, {"cols", op.in_dim()}, {"triplets", t}};
      break;
    }
    case OpKind::gradient_1d:
      j = {{"type", "gradient"}, {"shape", {std::get<Shape1D>(op.grid_shape()).n}}};
      break;
    case OpKind::gradient_2d: {
      const auto s = std::get<Shape2D>(op.grid_shape());
      j = {{"type", "gradient"}, {"shape", {s.rows, s.cols}}};
      break;
    }
    case OpKind::group_selector:
      j = {{"type", "groups"}, {"in_dim", op.in_dim()}, {"groups", op.groups()}};
      break;
    case OpKind::scaled:
      j = {{"type", "scaled"}, {"factor", op.scaled_factor()}, {"inner", operator_to_json(op.scaled_inner())}};
      break;
  }
  // Record the blocking only when it differs from the constructor's default.
  const LinearOp rebuilt = operator_from_json(j, {});
  if (!(rebuilt.blocks() == op.blocks())) {
    std::vector<std::size_t> sizes;
    for (std::size_t b = 0; b < op.blocks().block_count(); ++b) sizes.push_back(op.blocks().block_size(b));
    if (op.block_dim() != 0) {
      j["blocks"] = op.block_dim();
    } else {
      j["blocks"] = sizes;
    }
  }
  return j;
}

Problem problem_from_json(const json& j, const fs::path& base_dir) {
  try {
    LinearOp K = operator_from_json(j.at("K"), base_dir);
    LinearOp A = operator_from_json(j.at("A"), base_dir);
    if (j.contains("blocks")) A = A.with_blocks(layout_from_json(j.at("blocks"), A.out_dim()));
    Vec y = vector_from_json(j.at("y"), base_dir);
    const auto& pj = j.at("penalty");
    const NormKind kind = parse_norm_kind(pj.value("norm_kind", std::string("block-euclidean")));
    return make_problem(std::move(K), std::move(A), std::move(y), Penalty(pj.at("lambda").get<double>(), kind));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("problem: ") + e.what());
  }
}

json problem_to_json(const Problem& problem) {
  return {{"K", operator_to_json(problem.K)},
          {"A", operator_to_json(problem.A)},
          {"y", std::vector<double>(problem.y.data(), problem.y.data() + problem.y.size())},
          {"penalty", {{"lambda", problem.penalty.lambda}, {"norm_kind", to_string(problem.penalty.norm)}}}};
}

Problem read_problem(const fs::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return problem_from_json(j, path.parent_path());
}

void write_problem(const fs::path& path, const Problem& problem) {
  auto out = open_out(path);
  out << problem_to_json(problem).dump(2) << '\n';
  finish(out, path);
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << "n,objective,fp_residual,dx_norm,dw_norm\n";
  for (const auto& r : trace.rows) {
    out << r.n << ',' << format_real(r.objective) << ',' << format_real(r.fp_residual) << ','
        << format_real(r.dx_norm) << ',' << format_real(r.dw_norm) << '\n';
  }
}

}  // namespace nsp::io

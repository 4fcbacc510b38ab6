#include "nsp/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsp/error.hpp"
#include "nsp/kernels.hpp"

namespace nsp {

const char* to_string(NormKind kind) {
  switch (kind) {
    case NormKind::block_euclidean: return "block-euclidean";
    case NormKind::block_l1: return "block-l1";
    case NormKind::block_linf: return "block-linf";
  }
  return "unknown";
}

NormKind parse_norm_kind(const std::string& name) {
  if (name == "block-euclidean") return NormKind::block_euclidean;
  if (name == "block-l1") return NormKind::block_l1;
  if (name == "block-linf") return NormKind::block_linf;
  throw InvalidArgument("unknown norm kind '" + name + "'");
}

Penalty::Penalty(double lambda_, NormKind norm_) : lambda(lambda_), norm(norm_) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("penalty: lambda must be positive and finite, got " + std::to_string(lambda));
  }
}

namespace {

std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Applies `norm` to each block and folds with `fold`.
template <class Norm, class Fold>
double reduce_blocks(const BlockLayout& layout, const Vec& u, double init, Norm norm, Fold fold) {
  double acc = init;
  for (std::size_t b = 0; b < layout.block_count(); ++b) {
    acc = fold(acc, norm(u.segment(static_cast<Eigen::Index>(layout.block_begin(b)),
                                   static_cast<Eigen::Index>(layout.block_size(b)))));
  }
  return acc;
}

}  // namespace

double penalty_value(const Penalty& p, const BlockLayout& layout, const Vec& u) {
  check_size("penalty_value: input", layout.total(), static_cast<std::size_t>(u.size()));
  const auto sum = [](double a, double b) { return a + b; };
  double total = 0.0;
  switch (p.norm) {
    case NormKind::block_euclidean:
      total = reduce_blocks(layout, u, 0.0, [](const auto& s) { return s.norm(); }, sum);
      break;
    case NormKind::block_l1:
      total = reduce_blocks(layout, u, 0.0, [](const auto& s) { return s.template lpNorm<1>(); }, sum);
      break;
    case NormKind::block_linf:
      total = reduce_blocks(layout, u, 0.0, [](const auto& s) { return s.template lpNorm<Eigen::Infinity>(); }, sum);
      break;
  }
  return p.lambda * total;
}

double dual_norm_max(const Penalty& p, const BlockLayout& layout, const Vec& w) {
  check_size("dual_norm_max: input", layout.total(), static_cast<std::size_t>(w.size()));
  const auto max = [](double a, double b) { return std::max(a, b); };
  switch (p.norm) {
    case NormKind::block_euclidean:
      return reduce_blocks(layout, w, 0.0, [](const auto& s) { return s.norm(); }, max);
    case NormKind::block_l1:
      return reduce_blocks(layout, w, 0.0, [](const auto& s) { return s.template lpNorm<Eigen::Infinity>(); }, max);
    case NormKind::block_linf:
      return reduce_blocks(layout, w, 0.0, [](const auto& s) { return s.template lpNorm<1>(); }, max);
  }
  return 0.0;
}

void prox_conjugate_into(const Penalty& p, const BlockLayout& layout, std::span<const double> u,
                         double scale, std::span<double> out) {
  check_size("prox_conjugate: input", layout.total(), u.size());
  check_size("prox_conjugate: output", layout.total(), out.size());
  if (!(scale > 0.0)) throw InvalidArgument("prox_conjugate: scale must be positive");
  switch (p.norm) {
    case NormKind::block_euclidean:
      kernels::project_blocks_l2(layout.offsets(), p.lambda, u, out);
      break;
    case NormKind::block_l1:
      kernels::project_box(p.lambda, u, out);
      break;
    case NormKind::block_linf:
      kernels::project_blocks_l1(layout.offsets(), p.lambda, u, out);
      break;
  }
}

Vec prox_conjugate(const Penalty& p, const BlockLayout& layout, const Vec& u, double scale) {
  Vec out(u.size());
  prox_conjugate_into(p, layout, as_span(u), scale, as_span(out));
  return out;
}

Vec prox_primal(const Penalty& p, const BlockLayout& layout, const Vec& u, double scale) {
  return u - prox_conjugate(p, layout, u, scale);
}

Vec project_linf_ball(const Penalty& p, const BlockLayout& layout, const Vec& u) {
  if (p.norm != NormKind::block_euclidean) {
    throw InvalidArgument("project_linf_ball: needs a block-euclidean penalty");
  }
  return prox_conjugate(p, layout, u, 1.0);
}

Vec soft_threshold(const Penalty& p, const BlockLayout& layout, const Vec& u) {
  if (p.norm != NormKind::block_euclidean) {
    throw InvalidArgument("soft_threshold: needs a block-euclidean penalty");
  }
  return prox_primal(p, layout, u, 1.0);
}

Vec project_l1_ball(const Vec& v, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("project_l1_ball: radius must be positive");
  Vec out(v.size());
  kernels::l1_ball_project(as_span(v), radius, as_span(out));
  return out;
}

}  // namespace nsp

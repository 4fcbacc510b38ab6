#pragma once

#include <span>

#include "nsp/linops.hpp"

namespace nsp {

// Within-block norm used by H(u) = lambda * sum_i |u_i|.
enum class NormKind { block_euclidean, block_l1, block_linf };

const char* to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& name);

// H(u) = lambda * sum over blocks of |u_b|, |.| per NormKind. Its conjugate H*
// is the indicator of the per-block dual-norm ball of radius lambda, so
// prox_{c H*} is a projection for every c > 0.
struct Penalty {
  double lambda = 1.0;
  NormKind norm = NormKind::block_euclidean;

  Penalty() = default;
  Penalty(double lambda_, NormKind norm_);
};

// lambda * sum_b |u_b|.
double penalty_value(const Penalty& p, const BlockLayout& layout, const Vec& u);

// Largest per-block dual norm of w (Euclidean / max-abs / sum-abs for the
// Euclidean / 1 / infinity primal norms). w is feasible for H* iff this is <= lambda.
double dual_norm_max(const Penalty& p, const BlockLayout& layout, const Vec& w);

// prox_H for the Euclidean block norm: u - lambda u/|u| if |u| > lambda, else 0.
Vec soft_threshold(const Penalty& p, const BlockLayout& layout, const Vec& u);

// prox_{H*} for the Euclidean block norm: lambda u/|u| if |u| > lambda, else u.
Vec project_linf_ball(const Penalty& p, const BlockLayout& layout, const Vec& u);

// prox of scale * H*. Independent of scale since H* is an indicator.
Vec prox_conjugate(const Penalty& p, const BlockLayout& layout, const Vec& u, double scale);
void prox_conjugate_into(const Penalty& p, const BlockLayout& layout, std::span<const double> u,
                         double scale, std::span<double> out);

// Moreau complement of prox_conjugate at the same scale: u - prox_{scale H*}(u),
// which equals scale * prox_{H/scale}(u/scale) = prox_H(u) for these
// positively homogeneous penalties.
Vec prox_primal(const Penalty& p, const BlockLayout& layout, const Vec& u, double scale);

// Euclidean projection onto {z : sum |z_i| <= radius}.
Vec project_l1_ball(const Vec& v, double radius);

}  // namespace nsp

#pragma once

#include <functional>
#include <vector>

#include "slab/field.hpp"
#include "slab/params.hpp"

namespace slab {

/// Exponential phase weight phi(v, I) = exp(a(|v|^2/2 + I)).
inline double weight_phi(const Vec3& v, double I, double a) {
  return std::exp(a * (0.5 * v.norm2() + I));
}

/// Per-slab-position integral of phi * w_test * f over (v, I), plus its max
/// over positions. w_test = 1 when absent.
struct WeightedIntegral {
  std::vector<double> per_x;
  double max_over_x = 0;
};
WeightedIntegral integrate_weighted(const Field& f, double a,
                                    const std::function<double(const Vec3&, double)>& w_test = {});

/// Weighted norm with a movable singularity:
///   sup_w int phi(v,I) |v-w|^(-k) max_x|f| dv dI,
/// k in [0, 1). The sup runs over all velocity grid nodes, the origin, and the
/// field's mean velocity. Nodes with |v-w| below the equivalent-ball radius
/// r_eq = h (3/(4pi))^(1/3) use the exact cell average (3/(3-k)) r_eq^(-k) so
/// the singular weight is integrated, not sampled.
struct NormKResult {
  double value = 0;
  Vec3 argmax_w;
};
NormKResult norm_k(const Field& f, double k, double a);

/// k = 0 specialization (no w dependence).
double norm_0(const Field& f, double a);

/// Plane-restricted norm: sup over a deterministic family of planes of
///   int_plane int_I phi * max_x|f| dpi(v) dI
/// with the standard surface measure. The family: every axis-aligned plane
/// v_d = c through a grid coordinate, plus 64 random orientations through the
/// field's mean velocity (fixed seed, so the candidate set is reproducible).
struct PlaneNormResult {
  double value = 0;
  Vec3 normal{1, 0, 0};
  double offset = 0;        // plane is { v . normal = offset }
  bool axis_aligned = true;
  int axis = 0;
};
PlaneNormResult norm_plane(const Field& f, const CollisionParams& cp);

/// Gaussian-mollified plane integral
///   int sqrt(am/pi) exp(-am (v.n - c)^2) phi max_x|f| dv dI,
/// evaluated as an in-plane rule times Gauss-Hermite in the normal direction
/// (a grid sum cannot resolve am = 1e4, whose kernel is narrower than a cell).
/// Converges to the direct plane integral as am -> infinity.
double norm_plane_mollified(const Field& f, const CollisionParams& cp, double alpha_moll,
                            const Vec3& normal, double offset);

/// The composite norm |||f||| = ||f||_0 + ||f||_(1-gamma) + ||f||_P and its
/// pieces (k = 1 - gamma is the gain-singularity order).
struct NormReport {
  double norm0 = 0;
  double norm_sing = 0;
  double k_sing = 0;
  Vec3 argmax_w;
  PlaneNormResult plane;
  double triple = 0;
};
NormReport norm_report(const Field& f, const CollisionParams& cp);

}  // namespace slab

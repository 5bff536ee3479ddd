#include "slab/norms.hpp"

#include <cmath>

#include "slab/quadrature.hpp"
#include "slab/rng.hpp"

namespace slab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Interpolate per-node scalars (already reduced over x) with a stencil.
double eval_nodal(const std::vector<double>& g, const Stencil& st) {
  double s = 0.0;
  for (int k = 0; k < st.n; ++k) s += st.w[k] * g[st.idx[k]];
  return s;
}

/// Two unit vectors spanning the plane orthogonal to n (n need not be unit).
void plane_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  const Vec3 nn = n * (1.0 / n.norm());
  const Vec3 seed = std::fabs(nn.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const double d = seed.dot(nn);
  Vec3 t = seed - d * nn;
  e1 = t * (1.0 / t.norm());
  e2 = {nn.y * e1.z - nn.z * e1.y, nn.z * e1.x - nn.x * e1.z, nn.x * e1.y - nn.y * e1.x};
}

}  // namespace

WeightedIntegral integrate_weighted(const Field& f, double a,
                                    const std::function<double(const Vec3&, double)>& w_test) {
  const PhaseGrid& g = f.grid();
  WeightedIntegral out;
  out.per_x.assign(f.n_x(), 0.0);
  for (int node = 0; node < f.n_nodes(); ++node) {
    const Vec3 v = g.velocity(node);
    const double I = g.internal_energy(node);
    double w = g.node_weight(node) * weight_phi(v, I, a);
    if (w_test) w *= w_test(v, I);
    const double* row = f.row(node);
    for (int ix = 0; ix < f.n_x(); ++ix) out.per_x[ix] += w * row[ix];
  }
  for (double v : out.per_x) out.max_over_x = std::max(out.max_over_x, std::fabs(v));
  return out;
}

NormKResult norm_k(const Field& f, double k, double a) {
  const PhaseGrid& g = f.grid();
  const std::vector<double> gx = f.max_abs_over_x();
  NormKResult res;

  if (k == 0.0) {
    double acc = 0.0;
    for (int node = 0; node < f.n_nodes(); ++node)
      acc += g.node_weight(node) * weight_phi(g.velocity(node), g.internal_energy(node), a) *
             gx[node];
    res.value = acc;
    return res;
  }

  // Precompute the phi-weighted integrand per node; the w loop then only
  // touches the singular factor.
  std::vector<double> base(f.n_nodes());
  for (int node = 0; node < f.n_nodes(); ++node)
    base[node] =
        g.node_weight(node) * weight_phi(g.velocity(node), g.internal_energy(node), a) * gx[node];

  const double r_eq = g.hv * std::cbrt(3.0 / (4.0 * kPi));
  const double cell_avg = 3.0 / (3.0 - k) * std::pow(r_eq, -k);

  std::vector<Vec3> candidates;
  candidates.reserve(g.n_vnodes() + 2);
  for (int iv = 0; iv < g.n_vnodes(); ++iv) candidates.push_back(g.velocity(iv * g.spec.n_I));
  candidates.push_back({0, 0, 0});
  candidates.push_back(field_moments(f).mean_u);

  const int nI = g.spec.n_I;
  for (const Vec3& w : candidates) {
    double acc = 0.0;
    // The singular factor depends only on the velocity node; sum I first.
    for (int iv = 0; iv < g.n_vnodes(); ++iv) {
      double bI = 0.0;
      for (int j = 0; j < nI; ++j) bI += base[iv * nI + j];
      if (bI == 0.0) continue;
      const double d = (g.velocity(iv * nI) - w).norm();
      acc += bI * (d < r_eq ? cell_avg : std::pow(d, -k));
    }
    if (acc > res.value) {
      res.value = acc;
      res.argmax_w = w;
    }
  }
  return res;
}

double norm_0(const Field& f, double a) { return norm_k(f, 0.0, a).value; }

namespace {

/// In-plane integral of phi * g at normal offset t from the plane
/// {v.n = offset}: generic uniform 2-D rule with the grid's own spacing.
double plane_slice_generic(const PhaseGrid& g, const std::vector<double>& gx, double a,
                           double alpha, const Vec3& nrm, double offset, double t) {
  Vec3 e1, e2;
  plane_basis(nrm, e1, e2);
  const Vec3 nn = nrm * (1.0 / nrm.norm());
  const Vec3 p0 = (offset + t) * nn;
  const double extent = std::sqrt(3.0) * g.spec.v_max;
  const int np = static_cast<int>(std::ceil(2.0 * extent / g.hv));
  const double hp = 2.0 * extent / np;
  double acc = 0.0;
  Stencil st;
  for (int i = 0; i < np; ++i) {
    const double s = -extent + (i + 0.5) * hp;
    for (int j = 0; j < np; ++j) {
      const double u = -extent + (j + 0.5) * hp;
      const Vec3 p = p0 + s * e1 + u * e2;
      if (std::fabs(p.x) >= g.spec.v_max || std::fabs(p.y) >= g.spec.v_max ||
          std::fabs(p.z) >= g.spec.v_max)
        continue;
      for (int jI = 0; jI < g.spec.n_I; ++jI) {
        if (!g.stencil(p, g.I_nodes[jI], alpha, st)) continue;
        const double val = eval_nodal(gx, st);
        if (val == 0.0) continue;
        acc += hp * hp * g.wI[jI] * weight_phi(p, g.I_nodes[jI], a) * val;
      }
    }
  }
  return acc;
}

/// In-plane integral for an axis-aligned plane v_axis = offset + t: transverse
/// directions use the exact grid nodes; only the normal coordinate is
/// interpolated. At t = 0 with offset on a grid coordinate this is exact.
double plane_slice_axis(const PhaseGrid& g, const std::vector<double>& gx, double a, double alpha,
                        int axis, double offset, double t) {
  const double c = offset + t;
  if (std::fabs(c) >= g.spec.v_max) return 0.0;
  double acc = 0.0;
  Stencil st;
  Vec3 p;
  for (int i = 0; i < g.spec.n_v; ++i) {
    for (int j = 0; j < g.spec.n_v; ++j) {
      p[axis] = c;
      p[(axis + 1) % 3] = g.v1d[i];
      p[(axis + 2) % 3] = g.v1d[j];
      for (int jI = 0; jI < g.spec.n_I; ++jI) {
        if (!g.stencil(p, g.I_nodes[jI], alpha, st)) continue;
        const double val = eval_nodal(gx, st);
        if (val == 0.0) continue;
        acc += g.hv * g.hv * g.wI[jI] * weight_phi(p, g.I_nodes[jI], a) * val;
      }
    }
  }
  return acc;
}

}  // namespace

PlaneNormResult norm_plane(const Field& f, const CollisionParams& cp) {
  const PhaseGrid& g = f.grid();
  const std::vector<double> gx = f.max_abs_over_x();
  PlaneNormResult best;

  // Axis-aligned planes through every velocity grid coordinate: these contain
  // grid nodes, so the transverse rule is exact.
  for (int axis = 0; axis < 3; ++axis) {
    for (int i = 0; i < g.spec.n_v; ++i) {
      const double val = plane_slice_axis(g, gx, cp.weight_a, cp.alpha, axis, g.v1d[i], 0.0);
      if (val > best.value) {
        best.value = val;
        best.axis_aligned = true;
        best.axis = axis;
        best.offset = g.v1d[i];
        best.normal = Vec3{axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
      }
    }
  }

  // Random orientations through the mean velocity (fixed stream -> the family
  // is deterministic and identical across runs).
  const Vec3 mean_u = field_moments(f).mean_u;
  CounterRng rng(777, 0, 0);
  for (int p = 0; p < 64; ++p) {
    const Vec3 nrm = rng.next_unit_vector();
    const double offset = nrm.dot(mean_u);
    const double val = plane_slice_generic(g, gx, cp.weight_a, cp.alpha, nrm, offset, 0.0);
    if (val > best.value) {
      best.value = val;
      best.axis_aligned = false;
      best.axis = -1;
      best.offset = offset;
      best.normal = nrm;
    }
  }
  return best;
}

double norm_plane_mollified(const Field& f, const CollisionParams& cp, double alpha_moll,
                            const Vec3& normal, double offset) {
  const PhaseGrid& g = f.grid();
  const std::vector<double> gx = f.max_abs_over_x();

  // Axis-aligned detection: reuse the node-exact transverse rule in that case.
  int axis = -1;
  const Vec3 nn = normal * (1.0 / normal.norm());
  for (int d = 0; d < 3; ++d)
    if (std::fabs(std::fabs(nn[d]) - 1.0) < 1e-14) axis = d;

  // int exp(-am t^2) S(t) dt = (1/sqrt(am)) sum_h w_h S(t_h / sqrt(am)) with
  // Gauss-Hermite nodes; the sqrt(am/pi) prefactor leaves 1/sqrt(pi).
  static const Rule1D gh = gauss_hermite(20);
  const double inv_sqrt_am = 1.0 / std::sqrt(alpha_moll);
  double acc = 0.0;
  for (const auto& [th, wh] : gh) {
    const double t = th * inv_sqrt_am;
    const double slice = axis >= 0
                             ? plane_slice_axis(g, gx, cp.weight_a, cp.alpha, axis, offset, t)
                             : plane_slice_generic(g, gx, cp.weight_a, cp.alpha, normal, offset, t);
    acc += wh * slice;
  }
  return acc / std::sqrt(kPi);
}

NormReport norm_report(const Field& f, const CollisionParams& cp) {
  NormReport r;
  r.norm0 = norm_0(f, cp.weight_a);
  r.k_sing = 1.0 - cp.gamma;
  if (r.k_sing > 0.0) {
    const NormKResult nk = norm_k(f, r.k_sing, cp.weight_a);
    r.norm_sing = nk.value;
    r.argmax_w = nk.argmax_w;
  } else {
    r.norm_sing = r.norm0;  // k = 0: the singular norm coincides with norm0
  }
  r.plane = norm_plane(f, cp);
  r.triple = r.norm0 + r.norm_sing + r.plane.value;
  return r;
}

}  // namespace slab

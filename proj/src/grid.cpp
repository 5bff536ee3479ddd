#include "slab/grid.hpp"

#include <cmath>

namespace slab {

PhaseGrid build_grid(const GridSpec& spec) {
  if (spec.n_x < 2) throw ConfigError("grid.n_x must be >= 2 (both slab faces)");
  if (spec.n_v < 2) throw ConfigError("grid.n_v must be >= 2");
  if (spec.n_v % 2 != 0)
    throw ConfigError("grid.n_v must be even: odd counts place a velocity node on v1 = 0");
  if (!(spec.v_max > 0)) throw ConfigError("grid.v_max must be > 0");
  if (spec.n_I < 2) throw ConfigError("grid.n_I must be >= 2");
  if (!(spec.I_max > 0)) throw ConfigError("grid.I_max must be > 0");
  if (spec.i_spacing == ISpacing::stretched && !(spec.i_stretch_T > 0))
    throw ConfigError("grid.I_stretch_T must be > 0 for stretched spacing");

  PhaseGrid g;
  g.spec = spec;

  g.x.resize(spec.n_x);
  for (int i = 0; i < spec.n_x; ++i) g.x[i] = static_cast<double>(i) / (spec.n_x - 1);

  g.hv = 2.0 * spec.v_max / spec.n_v;
  g.v1d.resize(spec.n_v);
  for (int i = 0; i < spec.n_v; ++i) g.v1d[i] = -spec.v_max + (i + 0.5) * g.hv;

  g.I_nodes.resize(spec.n_I);
  g.wI.resize(spec.n_I);
  g.sI.resize(spec.n_I);
  if (spec.i_spacing == ISpacing::uniform) {
    const double h = spec.I_max / spec.n_I;
    for (int j = 0; j < spec.n_I; ++j) {
      g.I_nodes[j] = (j + 0.5) * h;
      g.wI[j] = h;
      g.sI[j] = g.I_nodes[j];
    }
    g.s_cap = spec.I_max;
  } else {
    // Cell-centered midpoint rule in s = 1 - exp(-I/T). dI = T ds/(1-s), so
    // the weight T*ds/(1-s_j) makes sum_j w_j exp(-I_j/T) equal the exact
    // integral T(1 - exp(-I_max/T)) termwise: w_j e^{-I_j/T} = T ds.
    const double T = spec.i_stretch_T;
    const double s_max = 1.0 - std::exp(-spec.I_max / T);
    const double ds = s_max / spec.n_I;
    for (int j = 0; j < spec.n_I; ++j) {
      const double s = (j + 0.5) * ds;
      g.sI[j] = s;
      g.I_nodes[j] = -T * std::log1p(-s);
      g.wI[j] = T * ds / (1.0 - s);
    }
    g.s_cap = s_max;
  }
  return g;
}

double PhaseGrid::icoord(double I) const {
  if (spec.i_spacing == ISpacing::uniform) return I;
  return 1.0 - std::exp(-I / spec.i_stretch_T);
}

namespace {

/// Per-axis piece of the multilinear stencil: at most two (index, weight)
/// entries; count 0 means the point is outside and the whole stencil is empty.
struct AxisPart {
  int count = 0;
  int idx[2];
  double w[2];
};

}  // namespace

bool PhaseGrid::stencil(const Vec3& v, double I, double alpha, Stencil& out) const {
  out.n = 0;
  const int nv = spec.n_v;

  AxisPart ax[4];
  for (int d = 0; d < 3; ++d) {
    const double vd = v[d];
    if (vd <= -spec.v_max || vd >= spec.v_max) return false;
    const double u = (vd + spec.v_max) / hv - 0.5;  // node coordinate
    const int lo = static_cast<int>(std::floor(u));
    AxisPart& p = ax[d];
    if (lo < 0) {
      // Between the box face and the first midpoint: taper from 0 at the face.
      p.count = 1;
      p.idx[0] = 0;
      p.w[0] = (vd + spec.v_max) / (0.5 * hv);
    } else if (lo >= nv - 1) {
      p.count = 1;
      p.idx[0] = nv - 1;
      p.w[0] = (spec.v_max - vd) / (0.5 * hv);
    } else {
      const double t = u - lo;
      p.count = 2;
      p.idx[0] = lo;
      p.idx[1] = lo + 1;
      p.w[0] = 1.0 - t;
      p.w[1] = t;
    }
  }

  {
    if (I < 0.0 || I >= spec.I_max) {
      if (I == 0.0 && alpha == 0.0) {
        // Clamp exactly-zero internal energy to the first node (alpha = 0).
        ax[3].count = 1;
        ax[3].idx[0] = 0;
        ax[3].w[0] = 1.0;
      } else {
        return false;
      }
    } else {
      const double s = icoord(I);
      AxisPart& p = ax[3];
      if (s <= sI[0]) {
        p.count = 1;
        p.idx[0] = 0;
        // Anchored at (0, 0) for alpha > 0; clamped for alpha = 0.
        p.w[0] = alpha > 0.0 ? s / sI[0] : 1.0;
      } else if (s >= sI[spec.n_I - 1]) {
        p.count = 1;
        p.idx[0] = spec.n_I - 1;
        p.w[0] = (s_cap - s) / (s_cap - sI[spec.n_I - 1]);
      } else {
        int lo = 0, hi = spec.n_I - 1;
        while (hi - lo > 1) {
          const int mid = (lo + hi) / 2;
          (sI[mid] <= s ? lo : hi) = mid;
        }
        const double t = (s - sI[lo]) / (sI[lo + 1] - sI[lo]);
        p.count = 2;
        p.idx[0] = lo;
        p.idx[1] = lo + 1;
        p.w[0] = 1.0 - t;
        p.w[1] = t;
      }
    }
  }

  // Tensor product of the four axis parts.
  for (int a = 0; a < ax[0].count; ++a)
    for (int b = 0; b < ax[1].count; ++b)
      for (int c = 0; c < ax[2].count; ++c)
        for (int e = 0; e < ax[3].count; ++e) {
          const double w = ax[0].w[a] * ax[1].w[b] * ax[2].w[c] * ax[3].w[e];
          if (w == 0.0) continue;
          out.idx[out.n] = node_index(ax[0].idx[a], ax[1].idx[b], ax[2].idx[c], ax[3].idx[e]);
          out.w[out.n] = w;
          ++out.n;
        }
  return out.n > 0;
}

}  // namespace slab

#pragma once

#include <functional>
#include <vector>

#include "slab/grid.hpp"
#include "slab/vec3.hpp"

namespace slab {

/// Distribution values on a PhaseGrid: node-major with the x direction
/// contiguous, so per-sample accumulations over all slab positions are plain
/// strided loops over a short contiguous row.
class Field {
 public:
  Field() = default;
  explicit Field(const PhaseGrid& g) : grid_(&g), n_x_(g.spec.n_x), val_(g.n_nodes() * g.spec.n_x, 0.0) {}

  const PhaseGrid& grid() const { return *grid_; }
  int n_x() const { return n_x_; }
  int n_nodes() const { return grid_->n_nodes(); }

  double* row(int node) { return val_.data() + static_cast<std::size_t>(node) * n_x_; }
  const double* row(int node) const { return val_.data() + static_cast<std::size_t>(node) * n_x_; }
  double& at(int node, int ix) { return row(node)[ix]; }
  double at(int node, int ix) const { return row(node)[ix]; }

  std::vector<double>& data() { return val_; }
  const std::vector<double>& data() const { return val_; }

  /// Interpolated value at one slab position.
  double eval(const Stencil& st, int ix) const {
    double s = 0.0;
    for (int k = 0; k < st.n; ++k) s += st.w[k] * row(st.idx[k])[ix];
    return s;
  }

  /// Per-node max_x |f|: the discrete realization of the x-sup that all the
  /// weighted norms take before integrating over (v, I).
  std::vector<double> max_abs_over_x() const;

  void fill(double c) { val_.assign(val_.size(), c); }

  /// Populate from a callback f(v, I, ix).
  void assign(const std::function<double(const Vec3&, double, int)>& fn);
  /// Populate from an x-independent callback f(v, I).
  void assign_uniform(const std::function<double(const Vec3&, double)>& fn);

  double sup_abs() const;

  static Field difference(const Field& a, const Field& b);

 private:
  const PhaseGrid* grid_ = nullptr;
  int n_x_ = 0;
  std::vector<double> val_;
};

/// Bulk moments of a field used to match MC proposal distributions; averaged
/// over slab positions. Zero-mass fields report zero moments (callers supply
/// fallbacks).
struct FieldMoments {
  double mass = 0;
  Vec3 mean_u;
  double var_v = 0;   // scalar variance per velocity component
  double mean_I = 0;
};

FieldMoments field_moments(const Field& f);

}  // namespace slab

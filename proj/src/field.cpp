#include "slab/field.hpp"

#include <cmath>

#include "slab/error.hpp"

namespace slab {

std::vector<double> Field::max_abs_over_x() const {
  std::vector<double> m(n_nodes(), 0.0);
  for (int node = 0; node < n_nodes(); ++node) {
    const double* r = row(node);
    double best = 0.0;
    for (int ix = 0; ix < n_x_; ++ix) best = std::max(best, std::fabs(r[ix]));
    m[node] = best;
  }
  return m;
}

void Field::assign(const std::function<double(const Vec3&, double, int)>& fn) {
  for (int node = 0; node < n_nodes(); ++node) {
    const Vec3 v = grid_->velocity(node);
    const double I = grid_->internal_energy(node);
    double* r = row(node);
    for (int ix = 0; ix < n_x_; ++ix) r[ix] = fn(v, I, ix);
  }
}

void Field::assign_uniform(const std::function<double(const Vec3&, double)>& fn) {
  for (int node = 0; node < n_nodes(); ++node) {
    const double value = fn(grid_->velocity(node), grid_->internal_energy(node));
    double* r = row(node);
    for (int ix = 0; ix < n_x_; ++ix) r[ix] = value;
  }
}

double Field::sup_abs() const {
  double s = 0.0;
  for (double v : val_) s = std::max(s, std::fabs(v));
  return s;
}

Field Field::difference(const Field& a, const Field& b) {
  if (a.grid_ != b.grid_ || a.val_.size() != b.val_.size())
    throw ConfigError("field difference requires matching grids");
  Field d(*a.grid_);
  for (std::size_t i = 0; i < a.val_.size(); ++i) d.val_[i] = a.val_[i] - b.val_[i];
  return d;
}

FieldMoments field_moments(const Field& f) {
  const PhaseGrid& g = f.grid();
  FieldMoments m;
  Vec3 vsum{};
  double wsum = 0, Isum = 0;
  for (int node = 0; node < f.n_nodes(); ++node) {
    const double w = g.node_weight(node);
    double fx = 0.0;
    const double* r = f.row(node);
    for (int ix = 0; ix < f.n_x(); ++ix) fx += r[ix];
    fx /= f.n_x();
    const double wf = w * fx;
    wsum += wf;
    vsum += wf * g.velocity(node);
    Isum += wf * g.internal_energy(node);
  }
  if (wsum <= 0.0) return m;
  m.mass = wsum;
  m.mean_u = vsum * (1.0 / wsum);
  m.mean_I = Isum / wsum;
  double vvar = 0.0;
  for (int node = 0; node < f.n_nodes(); ++node) {
    const double w = g.node_weight(node);
    double fx = 0.0;
    const double* r = f.row(node);
    for (int ix = 0; ix < f.n_x(); ++ix) fx += r[ix];
    fx /= f.n_x();
    vvar += w * fx * (g.velocity(node) - m.mean_u).norm2();
  }
  m.var_v = vvar / (3.0 * wsum);
  return m;
}

}  // namespace slab

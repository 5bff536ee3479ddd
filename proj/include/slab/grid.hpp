#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slab/error.hpp"
#include "slab/vec3.hpp"

namespace slab {

/// Spacing family for the internal-energy axis.
///
/// `uniform`: plain midpoint cells on [0, I_max]; weights sum to exactly I_max.
/// `stretched`: cells uniform in s = 1 - exp(-I/T_ref). The midpoint rule in s
/// with weights T_ref * ds / (1 - s_j) integrates exp(-I/T_ref) exactly, which
/// is what equilibrium-shaped integrands need on coarse grids.
enum class ISpacing { uniform, stretched };

struct GridSpec {
  int n_x = 9;           // slab positions, including both endpoints x=0, x=1
  int n_v = 10;          // velocity nodes per axis (cube), must be even; 10 puts
                         // nodes inside the slow ball |v| <= 1 that the
                         // invariant-set constants integrate over
  double v_max = 5.5;    // velocity box half-width
  int n_I = 6;           // internal-energy nodes
  double I_max = 12.0;   // internal-energy cap
  ISpacing i_spacing = ISpacing::stretched;
  double i_stretch_T = 1.0;  // T_ref of the stretched map
};

/// Up to 2^4 = 16 (node, weight) pairs describing a multilinear interpolation
/// of a point (v, I) from grid nodes. Empty (n = 0) outside the box.
struct Stencil {
  int n = 0;
  std::int32_t idx[16];
  double w[16];
};

/// Tensor phase grid: cell-centered uniform velocity cube x internal-energy
/// axis, plus the slab positions. Velocity nodes are cell midpoints, so with
/// even n_v no node sits on the plane v1 = 0 (the solution map is defined
/// separately on each half-space).
class PhaseGrid {
 public:
  GridSpec spec;

  std::vector<double> x;        // n_x slab positions in [0,1]
  std::vector<double> v1d;      // n_v per-axis velocity midpoints
  double hv = 0;                // velocity spacing; cell weight hv^3
  std::vector<double> I_nodes;  // n_I internal-energy nodes
  std::vector<double> wI;       // plain dI quadrature weights
  std::vector<double> sI;       // native interpolation coordinate of each I node
  double s_cap = 0;             // coordinate value at I = I_max (taper anchor)

  int n_vnodes() const { return spec.n_v * spec.n_v * spec.n_v; }
  int n_nodes() const { return n_vnodes() * spec.n_I; }

  // node = ((i1*n_v + i2)*n_v + i3)*n_I + iI
  int node_index(int i1, int i2, int i3, int iI) const {
    const int n = spec.n_v;
    return ((i1 * n + i2) * n + i3) * spec.n_I + iI;
  }
  void decode(int node, int& i1, int& i2, int& i3, int& iI) const {
    const int n = spec.n_v;
    iI = node % spec.n_I;
    node /= spec.n_I;
    i3 = node % n;
    node /= n;
    i2 = node % n;
    i1 = node / n;
  }
  Vec3 velocity(int node) const {
    int i1, i2, i3, iI;
    decode(node, i1, i2, i3, iI);
    return {v1d[i1], v1d[i2], v1d[i3]};
  }
  double internal_energy(int node) const { return I_nodes[node % spec.n_I]; }

  /// Phase-volume weight dv dI of a node (velocity cell volume times the
  /// I-axis weight).
  double node_weight(int node) const { return hv * hv * hv * wI[node % spec.n_I]; }

  /// Multilinear interpolation stencil at (v, I).
  ///
  /// Velocity: trilinear between midpoints, tapering linearly to zero at the
  /// box faces; zero outside. Internal energy: linear in the native coordinate
  /// (s for stretched grids, I for uniform); above the last node the value
  /// tapers to zero at I_max. Below the first node the segment is anchored at
  /// (I=0, value 0) when alpha > 0 -- the I^alpha weight vanishes there and the
  /// anchor keeps gain weights with (I'I'*)^(-alpha) factors bounded -- and
  /// clamps to the first node when alpha = 0.
  /// Returns false (empty stencil) when the point lies outside the box.
  bool stencil(const Vec3& v, double I, double alpha, Stencil& out) const;

  /// Native interpolation coordinate of an internal energy value.
  double icoord(double I) const;
};

/// Build and validate a grid. Throws ConfigError on bad sizes (odd n_v would
/// place velocity nodes on v1 = 0, so it is rejected).
PhaseGrid build_grid(const GridSpec& spec);

}  // namespace slab

#pragma once

#include <cstdint>
#include <functional>

#include "slab/field.hpp"
#include "slab/kernel.hpp"
#include "slab/params.hpp"

namespace slab {

/// Importance-sampling proposal for the gain integral: isotropic Gaussian for
/// the partner velocity, exponential for the partner internal energy. The
/// collision parameters (r, R) always use the Beta proposals that cancel the
/// parameter measure exactly, so only these two distributions are tunable.
struct ProposalParams {
  Vec3 u{};            // Gaussian mean velocity
  double sigma2 = 1.0; // Gaussian per-component variance
  double Imean = 1.0;  // exponential mean internal energy
};

/// Proposal matched to a field's bulk moments, with floors (variance >= 0.09,
/// mean internal energy >= 0.1) so degenerate fields cannot collapse the
/// sampler. A zero field yields the default proposal.
ProposalParams proposal_from_field(const Field& f);

struct QuadratureSpec {
  enum class Method { mc, tensor };
  Method method = Method::mc;
  long n_samples = 2000;      // MC samples per phase node
  std::uint64_t seed = 12345;
  // Tensor-product resolutions (r, R, cos-theta, phi); only for Method::tensor,
  // which is affordable on small grids only.
  int nt_r = 4, nt_R = 6, nt_cos = 8, nt_phi = 8;
};

struct CollisionEstimate {
  double value = 0;
  double std_error = 0;  // 0 for deterministic evaluations
  double n_eff = 0;      // Kish effective sample size of the weights
};

/// Deterministic collision frequency L(f): the (r,R,sigma) integrals reduce to
/// Beta closed forms for every kernel model, leaving a plain quadrature over
/// the partner phase grid. Evaluated at all nodes and slab positions.
Field loss_field(const Field& f, const CollisionParams& cp);

/// Single-node loss frequency (same reduction).
double loss_frequency(const Field& f, const CollisionParams& cp, int node, int ix);

/// Optional diagnostics of a gain sweep.
struct GainStats {
  double oob_fraction = 0;  // proposal mass falling outside the phase box
  double max_weight = 0;    // largest single-sample weight encountered
};

/// Monte Carlo gain term Q+(f,f) at all nodes and slab positions. One sample
/// set (keyed by seed/node/sample) is shared by all slab positions, so the
/// x loop is a contiguous accumulation. std_error_out, if non-null, receives
/// the per-node/per-x standard error of the mean.
void gain_field(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                const ProposalParams& prop, Field& out, Field* std_error_out = nullptr,
                GainStats* stats = nullptr);

/// Single-node MC gain estimate.
CollisionEstimate gain_term(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                            const ProposalParams& prop, int node, int ix);

/// Deterministic tensor-quadrature gain evaluation. The partner velocity uses
/// the grid cells (midpoint rule); the partner internal energy uses a
/// dedicated split Gauss-Legendre rule covering [0, I_max] densely plus the
/// tail (I_max, 3 v_max^2 + 2 I_max] -- the grid's own I axis is too coarse
/// for the partner integral, and partner energies beyond I_max can still land
/// both post states inside the box. r, R and the sphere use product rules from
/// `quad`. Cross-check path for small grids; cost scales like
/// n_nodes * n_vnodes * rule size, so callers may restrict evaluation to a
/// node subset (other rows stay zero).
Field gain_field_tensor(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                        const std::vector<int>* nodes = nullptr);

/// Q(f,f) = Q+ - f L together with its ingredients.
struct CollisionFieldResult {
  Field gain, loss, q;
};
CollisionFieldResult collision_operator(const Field& f, const CollisionParams& cp,
                                        const QuadratureSpec& quad, const ProposalParams& prop);

/// Two statistically independent MC estimates of int phi(v,I) Q+(f,f) dv dI at
/// one slab position. `lhs` runs the forward route: the output point (v, I) is
/// importance-sampled and each draw goes through the production gain-sample
/// core, so the angular-measure constant and the forward transform enter.
/// `rhs` samples the post-collisional variables and walks the collision
/// involution backwards, so the transform Jacobian and the literal parameter
/// measure enter the weight instead. Both target the same continuum integral
/// exactly; agreement within combined errors is a strong functional test of
/// the gain path and of the change of variables.
struct SymmetryResult {
  double lhs = 0, lhs_err = 0;
  double rhs = 0, rhs_err = 0;
  double combined_err() const;
  double discrepancy_sigma() const;
  /// Two-branch agreement verdict. Fails on a statistically resolved
  /// discrepancy (> sigma_limit standard errors) or on a gross relative gap
  /// (> rel_limit of the larger estimate) that is itself at least 2 standard
  /// errors. The second branch matters because a structural defect in the
  /// transform can inflate the estimator variance so much that an O(1)
  /// disagreement stays below the sigma threshold at any affordable sample
  /// count; a >20% gap backed by 2 sigma is never produced by round-off or
  /// honest MC noise at the sample counts used here.
  bool consistent(double sigma_limit = 5.0, double rel_limit = 0.2) const;
};
SymmetryResult symmetry_functional(const Field& f, const CollisionParams& cp,
                                   const ProposalParams& prop,
                                   const std::function<double(const Vec3&, double)>& test_weight,
                                   long n_samples, std::uint64_t seed, int ix = 0);

}  // namespace slab

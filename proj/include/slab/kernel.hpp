#pragma once

#include "slab/params.hpp"
#include "slab/vec3.hpp"

namespace slab {

/// A colliding pair: velocities and internal energies.
struct BLPair {
  Vec3 v, vs;
  double I = 0, Is = 0;
};

/// Collision parametrization: kinetic-energy fraction R, internal split r,
/// scattering direction sigma.
struct BLParams {
  double r = 0.5, R = 0.5;
  Vec3 sigma{1, 0, 0};
};

/// Total (conserved) pair energy |v-vs|^2/4 + I + Is.
double total_energy(const BLPair& p);

/// Post-collisional state from pre state and parameters:
///   v'  = (v+vs)/2 + sqrt(RE) sigma,   v'* = (v+vs)/2 - sqrt(RE) sigma,
///   I'  = r(1-R)E,                     I'* = (1-r)(1-R)E.
/// Conserves momentum and total energy by construction.
BLPair bl_forward(const BLPair& pre, const BLParams& prm, Mutation mut = Mutation::none);

/// Kinetic parameters of a state: r = I/(I+Is), R = |v-vs|^2/(4E),
/// sigma = (v-vs)/|v-vs|. Applied to bl_forward output this recovers the
/// sampled parameters exactly; applied to the pre state it yields the
/// primed parameters of the collision-involution change of variables.
/// Conventions: r = 1/2 when I+Is = 0, sigma = (1,0,0) when v = vs.
/// Throws NumericError when E = 0 (the parametrization is singular there).
BLParams bl_inverse(const BLPair& state);

/// Volume ratio of the collision involution,
///   J = R^{1/2}(1-R) / (R'^{1/2}(1-R')),
/// with R the kinetic fraction of the integration parametrization and R' the
/// one recovered from the pre state.
double jacobian_factor(double R, double Rp, Mutation mut = Mutation::none);

/// Collision kernel B(|v-vs|^2, I, Is, r, R) for the three models. g2 is the
/// squared relative speed.
double cross_section(KernelModel model, double g2, double I, double Is, double r, double R,
                     double gamma);

/// Sandwich envelope constants: Phi(r,R) and Psi(r,R) with
///   Phi (|g|^gamma + (I+Is)^(gamma/2)) <= B <= Psi (|g|^gamma + (I+Is)^(gamma/2)).
double kernel_lower_envelope(KernelModel model, double r, double R, double gamma);
double kernel_upper_envelope(KernelModel model, double r, double R, double gamma);

/// Parameter-measure density (r(1-r))^alpha (1-R)^(2alpha+1) R^(1/2) I^alpha Is^alpha.
double measure_weight(double r, double R, double I, double Is, double alpha,
                      Mutation mut = Mutation::none);

/// Its (r,R,sigma) integral: 4*pi * B(alpha+1,alpha+1) * B(3/2, 2alpha+2).
double c_alpha(double alpha, Mutation mut = Mutation::none);

/// Closed form of the scattering-direction integral
///   int_{S^2} |sqrt(RE) sigma + c|^{-(1-gamma)} dsigma
///     = (RE)^((gamma-1)/2) * 2pi/((1+gamma)|cb|) * ((|cb|+1)^(1+gamma) - ||cb|-1|^(1+gamma)),
/// cb = c / sqrt(RE). Continuous at cb = 0 with value 4pi (RE)^((gamma-1)/2);
/// equals 4pi identically at gamma = 1.
double sigma_integral_closed_form(double gamma, double RE, double cbar_norm);

/// Uniform bound 8pi / ((1+gamma) (RE)^((1-gamma)/2)) of the same integral.
double sigma_integral_upper_bound(double gamma, double RE);

/// Exact (r,R,sigma) integral of B against the parameter measure (the inner
/// part of the deterministic loss-frequency reduction). All three models
/// reduce to Beta-function closed forms.
double loss_inner_integral(KernelModel model, double g2, double I, double Is, double alpha,
                           double gamma, Mutation mut = Mutation::none);

}  // namespace slab

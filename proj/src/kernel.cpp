#include "slab/kernel.hpp"

#include <cmath>
#include <string>

#include "slab/error.hpp"

namespace slab {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

std::string to_string(KernelModel m) {
  switch (m) {
    case KernelModel::total_energy: return "total_energy";
    case KernelModel::detached_kinetic_internal: return "detached_kinetic_internal";
    case KernelModel::detached_per_particle: return "detached_per_particle";
  }
  return "?";
}

std::string to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::sigma_sign_flip: return "sigma_sign_flip";
    case Mutation::wrong_jacobian: return "wrong_jacobian";
    case Mutation::dropped_measure_exponent: return "dropped_measure_exponent";
    case Mutation::wrong_c_alpha: return "wrong_c_alpha";
    case Mutation::attenuation_sign_flip: return "attenuation_sign_flip";
  }
  return "?";
}

KernelModel kernel_model_from_string(const std::string& s) {
  if (s == "total_energy") return KernelModel::total_energy;
  if (s == "detached_kinetic_internal") return KernelModel::detached_kinetic_internal;
  if (s == "detached_per_particle") return KernelModel::detached_per_particle;
  throw ConfigError("unknown kernel model '" + s + "'");
}

Mutation mutation_from_string(const std::string& s) {
  if (s == "none") return Mutation::none;
  if (s == "sigma_sign_flip") return Mutation::sigma_sign_flip;
  if (s == "wrong_jacobian") return Mutation::wrong_jacobian;
  if (s == "dropped_measure_exponent") return Mutation::dropped_measure_exponent;
  if (s == "wrong_c_alpha") return Mutation::wrong_c_alpha;
  if (s == "attenuation_sign_flip") return Mutation::attenuation_sign_flip;
  throw ConfigError("unknown mutation '" + s + "'");
}

double total_energy(const BLPair& p) { return 0.25 * (p.v - p.vs).norm2() + p.I + p.Is; }

BLPair bl_forward(const BLPair& pre, const BLParams& prm, Mutation mut) {
  const double E = total_energy(pre);
  const Vec3 mid = 0.5 * (pre.v + pre.vs);
  const double k = std::sqrt(prm.R * E);
  BLPair post;
  post.v = mid + k * prm.sigma;
  // The deliberate defect drops the minus sign on the partner velocity, which
  // silently destroys energy conservation (|v'-v'*| collapses to 0).
  post.vs = mut == Mutation::sigma_sign_flip ? mid + k * prm.sigma : mid - k * prm.sigma;
  post.I = prm.r * (1.0 - prm.R) * E;
  post.Is = (1.0 - prm.r) * (1.0 - prm.R) * E;
  return post;
}

BLParams bl_inverse(const BLPair& state) {
  const double E = total_energy(state);
  if (E <= 0.0)
    throw NumericError("bl_inverse: zero total energy, collision parametrization is singular");
  BLParams p;
  const double Ipair = state.I + state.Is;
  p.r = Ipair > 0.0 ? state.I / Ipair : 0.5;
  const Vec3 g = state.v - state.vs;
  const double g2 = g.norm2();
  p.R = 0.25 * g2 / E;
  p.sigma = g2 > 0.0 ? g * (1.0 / std::sqrt(g2)) : Vec3{1, 0, 0};
  return p;
}

double jacobian_factor(double R, double Rp, Mutation mut) {
  if (mut == Mutation::wrong_jacobian)
    return R * std::sqrt(1.0 - R) / (Rp * std::sqrt(1.0 - Rp));
  return std::sqrt(R) * (1.0 - R) / (std::sqrt(Rp) * (1.0 - Rp));
}

double cross_section(KernelModel model, double g2, double I, double Is, double r, double R,
                     double gamma) {
  const double hg = 0.5 * gamma;
  switch (model) {
    case KernelModel::total_energy:
      return std::pow(0.25 * g2 + I + Is, hg);
    case KernelModel::detached_kinetic_internal:
      return std::pow(R * g2, hg) + std::pow((1.0 - R) * (I + Is), hg);
    case KernelModel::detached_per_particle:
      return std::pow(R * g2, hg) + std::pow(r * (1.0 - R) * I, hg) +
             std::pow((1.0 - r) * (1.0 - R) * Is, hg);
  }
  return 0.0;
}

double kernel_lower_envelope(KernelModel model, double r, double R, double gamma) {
  const double hg = 0.5 * gamma;
  switch (model) {
    case KernelModel::total_energy:
      // E^(g/2) >= 2^(-g/2-1) (|g|^g + (I+Is)^(g/2)) via E >= max of the parts.
      return std::pow(2.0, -hg - 1.0);
    case KernelModel::detached_kinetic_internal:
      return std::pow(std::min(R, 1.0 - R), hg);
    case KernelModel::detached_per_particle:
      return std::pow(std::min(R, 1.0 - R), hg) * std::pow(std::min(r, 1.0 - r), hg);
  }
  return 0.0;
}

double kernel_upper_envelope(KernelModel model, double r, double R, double gamma) {
  (void)r;
  const double hg = 0.5 * gamma;
  switch (model) {
    case KernelModel::total_energy:
      return 1.0;
    case KernelModel::detached_kinetic_internal:
      return std::pow(std::max(R, 1.0 - R), hg);
    case KernelModel::detached_per_particle:
      // The two internal pieces combine subadditively: x^h + y^h <= 2^(1-h)(x+y)^h.
      return std::pow(2.0, 1.0 - hg) * std::pow(std::max(R, 1.0 - R), hg);
  }
  return 0.0;
}

double measure_weight(double r, double R, double I, double Is, double alpha, Mutation mut) {
  const double expR = mut == Mutation::dropped_measure_exponent ? 2.0 * alpha : 2.0 * alpha + 1.0;
  double w = std::sqrt(R) * std::pow(1.0 - R, expR);
  if (alpha > 0.0) w *= std::pow(r * (1.0 - r), alpha) * std::pow(I * Is, alpha);
  return w;
}

double c_alpha(double alpha, Mutation mut) {
  const double v = 4.0 * kPi * std::beta(alpha + 1.0, alpha + 1.0) * std::beta(1.5, 2.0 * alpha + 2.0);
  return mut == Mutation::wrong_c_alpha ? 0.5 * v : v;
}

double sigma_integral_closed_form(double gamma, double RE, double cbar_norm) {
  if (!(RE > 0.0)) throw NumericError("sigma integral: RE must be > 0");
  const double pre = std::pow(RE, 0.5 * (gamma - 1.0));
  const double c = cbar_norm;
  if (c < 1e-6) {
    // Series of ((1+c)^(1+g) - (1-c)^(1+g))/c around c = 0; the quadratic
    // correction keeps 1e-12 accuracy through the switchover.
    const double h = 2.0 * (1.0 + gamma) * (1.0 + gamma * (gamma - 1.0) / 6.0 * c * c);
    return pre * 2.0 * kPi / (1.0 + gamma) * h;
  }
  const double num = std::pow(c + 1.0, 1.0 + gamma) - std::pow(std::fabs(c - 1.0), 1.0 + gamma);
  return pre * 2.0 * kPi / ((1.0 + gamma) * c) * num;
}

double sigma_integral_upper_bound(double gamma, double RE) {
  return 8.0 * kPi / ((1.0 + gamma) * std::pow(RE, 0.5 * (1.0 - gamma)));
}

double loss_inner_integral(KernelModel model, double g2, double I, double Is, double alpha,
                           double gamma, Mutation mut) {
  const double hg = 0.5 * gamma;
  const double gg = std::pow(g2, hg);  // |v - vs|^gamma
  switch (model) {
    case KernelModel::total_energy:
      return c_alpha(alpha, mut) * std::pow(0.25 * g2 + I + Is, hg);
    case KernelModel::detached_kinetic_internal:
      return 4.0 * kPi * std::beta(alpha + 1.0, alpha + 1.0) *
             (std::beta(1.5 + hg, 2.0 * alpha + 2.0) * gg +
              std::beta(1.5, 2.0 * alpha + 2.0 + hg) * std::pow(I + Is, hg));
    case KernelModel::detached_per_particle:
      return 4.0 * kPi * (std::beta(alpha + 1.0, alpha + 1.0) * std::beta(1.5 + hg, 2.0 * alpha + 2.0) * gg +
                          std::beta(alpha + 1.0 + hg, alpha + 1.0) *
                              std::beta(1.5, 2.0 * alpha + 2.0 + hg) *
                              (std::pow(I, hg) + std::pow(Is, hg)));
  }
  return 0.0;
}

}  // namespace slab

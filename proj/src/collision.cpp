#include "slab/collision.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "slab/error.hpp"
#include "slab/quadrature.hpp"
#include "slab/rng.hpp"

namespace slab {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

ProposalParams proposal_from_field(const Field& f) {
  const FieldMoments m = field_moments(f);
  ProposalParams p;
  if (m.mass <= 0.0) return p;
  p.u = m.mean_u;
  p.sigma2 = std::max(m.var_v, 0.09);
  p.Imean = std::max(m.mean_I, 0.1);
  return p;
}

// ---------------------------------------------------------------------------
// Loss frequency: L(f)(v,I) = int f(v*,I*) * [inner(g2, I, I*)] dv* dI* where
// inner is the exact (r,R,sigma) integral of B against the parameter measure
// (the I^a I*^a weights of the measure cancel the (II*)^-a of the integrand
// symbolically, which is why none appear here).
// ---------------------------------------------------------------------------

namespace {

/// Per-model constants and tables so the pair loop touches no std::beta/pow
/// beyond one |g|^gamma per velocity pair.
struct LossInner {
  KernelModel model;
  double hg;              // gamma/2
  double c_a = 0;         // model 1: c_alpha
  double kin = 0;         // models 2/3: coefficient of |g|^gamma
  std::vector<double> pair_term;  // model 2: coeff*(I1+I2)^hg, indexed j1*nI+j2
  std::vector<double> node_term;  // model 3: coeff*I_j^hg
};

LossInner make_loss_inner(const PhaseGrid& g, const CollisionParams& cp) {
  LossInner t;
  t.model = cp.kernel;
  t.hg = 0.5 * cp.gamma;
  const double a = cp.alpha;
  const int nI = g.spec.n_I;
  switch (cp.kernel) {
    case KernelModel::total_energy:
      t.c_a = c_alpha(a, cp.mutation);
      break;
    case KernelModel::detached_kinetic_internal: {
      const double br = std::beta(a + 1.0, a + 1.0);
      t.kin = 4.0 * kPi * br * std::beta(1.5 + t.hg, 2.0 * a + 2.0);
      const double ci = 4.0 * kPi * br * std::beta(1.5, 2.0 * a + 2.0 + t.hg);
      t.pair_term.resize(nI * nI);
      for (int j1 = 0; j1 < nI; ++j1)
        for (int j2 = 0; j2 < nI; ++j2)
          t.pair_term[j1 * nI + j2] = ci * std::pow(g.I_nodes[j1] + g.I_nodes[j2], t.hg);
      break;
    }
    case KernelModel::detached_per_particle: {
      t.kin = 4.0 * kPi * std::beta(a + 1.0, a + 1.0) * std::beta(1.5 + t.hg, 2.0 * a + 2.0);
      const double ci =
          4.0 * kPi * std::beta(a + 1.0 + t.hg, a + 1.0) * std::beta(1.5, 2.0 * a + 2.0 + t.hg);
      t.node_term.resize(nI);
      for (int j = 0; j < nI; ++j) t.node_term[j] = ci * std::pow(g.I_nodes[j], t.hg);
      break;
    }
  }
  return t;
}

}  // namespace

Field loss_field(const Field& f, const CollisionParams& cp) {
  const PhaseGrid& g = f.grid();
  const int nI = g.spec.n_I;
  const int nvn = g.n_vnodes();
  const int nx = f.n_x();
  const double wv3 = g.hv * g.hv * g.hv;
  const LossInner t = make_loss_inner(g, cp);
  const bool sqrt_path = (t.model == KernelModel::total_energy && t.hg == 0.5);

  std::vector<Vec3> vel(nvn);
  for (int iv = 0; iv < nvn; ++iv) vel[iv] = g.velocity(iv * nI);

  Field out(g);
  parallel_for(g.n_nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t n1 = lo; n1 < hi; ++n1) {
      const int i1v = static_cast<int>(n1) / nI;
      const int j1 = static_cast<int>(n1) % nI;
      const double I1 = g.I_nodes[j1];
      const Vec3 v1 = vel[i1v];
      double* Lrow = out.row(static_cast<int>(n1));
      for (int i2v = 0; i2v < nvn; ++i2v) {
        const double g2 = (v1 - vel[i2v]).norm2();
        const double gg = t.model == KernelModel::total_energy ? 0.0 : std::pow(g2, t.hg);
        const double base = 0.25 * g2 + I1;
        for (int j2 = 0; j2 < nI; ++j2) {
          double inner;
          switch (t.model) {
            case KernelModel::total_energy:
              inner = t.c_a * (sqrt_path ? std::sqrt(base + g.I_nodes[j2])
                                         : std::pow(base + g.I_nodes[j2], t.hg));
              break;
            case KernelModel::detached_kinetic_internal:
              inner = t.kin * gg + t.pair_term[j1 * nI + j2];
              break;
            default:
              inner = t.kin * gg + t.node_term[j1] + t.node_term[j2];
          }
          const double w = wv3 * g.wI[j2] * inner;
          const double* frow = f.row(i2v * nI + j2);
          for (int ix = 0; ix < nx; ++ix) Lrow[ix] += w * frow[ix];
        }
      }
    }
  });
  return out;
}

double loss_frequency(const Field& f, const CollisionParams& cp, int node, int ix) {
  const PhaseGrid& g = f.grid();
  const int nI = g.spec.n_I;
  const LossInner t = make_loss_inner(g, cp);
  const double wv3 = g.hv * g.hv * g.hv;
  const Vec3 v1 = g.velocity(node);
  const double I1 = g.internal_energy(node);
  double L = 0.0;
  for (int n2 = 0; n2 < g.n_nodes(); ++n2) {
    const double g2 = (v1 - g.velocity(n2)).norm2();
    const double I2 = g.internal_energy(n2);
    double inner;
    switch (t.model) {
      case KernelModel::total_energy:
        inner = t.c_a * std::pow(0.25 * g2 + I1 + I2, t.hg);
        break;
      case KernelModel::detached_kinetic_internal:
        inner = t.kin * std::pow(g2, t.hg) + t.pair_term[(node % nI) * nI + (n2 % nI)];
        break;
      default:
        inner = t.kin * std::pow(g2, t.hg) + t.node_term[node % nI] + t.node_term[n2 % nI];
    }
    L += wv3 * g.wI[n2 % nI] * inner * f.at(n2, ix);
  }
  return L;
}

// ---------------------------------------------------------------------------
// Gain term, Monte Carlo path.
//
// Integrand (per output node (v, I)):
//   Q+(v,I) = int f'f'*/(I'I'*)^a B (r(1-r))^a (1-R)^(2a+1) R^(1/2) I^a I*^a
//             dR dr dsigma dI* dv*.
// Proposals: v* Gaussian, I* exponential, sigma uniform, R ~ Beta(3/2, 2a+2),
// r ~ Beta(a+1, a+1). The Beta densities cancel the parameter measure exactly
// and contribute their normalizations to c_alpha, leaving the weight
//   W = c_alpha B f'f'* (I I* / (r(1-r) ((1-R)E)^2))^a / (q_v(v*) q_I(I*)).
// The interpolation anchor at I=0 keeps the (r(1-r))^-a factor bounded, since
// f' vanishes linearly in I' = r(1-R)E as r -> 0 (and f'* as r -> 1).
// ---------------------------------------------------------------------------

namespace {

struct GainSampler {
  const Field& f;
  const PhaseGrid& g;
  const CollisionParams& cp;
  const ProposalParams& prop;
  std::uint64_t seed;
  double c_a, qv_norm, inv2s2, sigma, invImean, beta_R_a, beta_R_b;

  GainSampler(const Field& f_, const CollisionParams& cp_, const QuadratureSpec& quad,
              const ProposalParams& prop_)
      : f(f_), g(f_.grid()), cp(cp_), prop(prop_), seed(quad.seed) {
    c_a = c_alpha(cp.alpha, cp.mutation);
    qv_norm = std::pow(kTwoPi * prop.sigma2, -1.5);
    inv2s2 = 0.5 / prop.sigma2;
    sigma = std::sqrt(prop.sigma2);
    invImean = 1.0 / prop.Imean;
    beta_R_a = 1.5;
    beta_R_b = 2.0 * cp.alpha + 2.0;
  }

  /// Core sample at an arbitrary output point (v, I), consuming proposal
  /// draws from `rng`. Returns false when the post state falls outside the
  /// box (zero contribution). On success fills the two stencils and the
  /// scalar prefactor P (sample value per x is P * f(st1, x) * f(st2, x)).
  bool draw_at(const Vec3& v, double I, CounterRng& rng, Stencil& st1, Stencil& st2,
               double& P) const {
    const Vec3 vs{prop.u.x + sigma * rng.next_gaussian(), prop.u.y + sigma * rng.next_gaussian(),
                  prop.u.z + sigma * rng.next_gaussian()};
    const double Is = rng.next_exponential(prop.Imean);
    const Vec3 dir = rng.next_unit_vector();
    const double R = rng.next_beta(beta_R_a, beta_R_b);
    const double r = rng.next_beta(cp.alpha + 1.0, cp.alpha + 1.0);

    const BLPair pre{v, vs, I, Is};
    const BLPair post = bl_forward(pre, {r, R, dir}, cp.mutation);
    if (!g.stencil(post.v, post.I, cp.alpha, st1) || !g.stencil(post.vs, post.Is, cp.alpha, st2))
      return false;

    const double g2 = (v - vs).norm2();
    const double B = cross_section(cp.kernel, g2, I, Is, r, R, cp.gamma);
    const double qv = qv_norm * std::exp(-(vs - prop.u).norm2() * inv2s2);
    const double qI = invImean * std::exp(-Is * invImean);
    P = c_a * B / (qv * qI);
    if (cp.alpha > 0.0) {
      const double E = 0.25 * g2 + I + Is;
      const double ie = (1.0 - R) * E;
      P *= std::pow(I * Is / (r * (1.0 - r) * ie * ie), cp.alpha);
    }
    if (!std::isfinite(P)) throw NumericError("gain sample: non-finite importance weight");
    return true;
  }

  /// One sample for output node `node` (per-node counter stream).
  bool draw(int node, long k, Stencil& st1, Stencil& st2, double& P) const {
    CounterRng rng(seed, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(k));
    try {
      return draw_at(g.velocity(node), g.internal_energy(node), rng, st1, st2, P);
    } catch (const NumericError&) {
      throw NumericError("gain_term: non-finite sample weight at node " + std::to_string(node) +
                         ", sample " + std::to_string(k));
    }
  }
};

}  // namespace

void gain_field(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                const ProposalParams& prop, Field& out, Field* std_error_out, GainStats* stats) {
  const PhaseGrid& g = f.grid();
  const int nx = f.n_x();
  const long N = quad.n_samples;
  const GainSampler sampler(f, cp, quad, prop);

  out = Field(g);
  if (std_error_out) *std_error_out = Field(g);

  std::vector<long> oob_counts(g.n_nodes(), 0);
  std::vector<double> max_w(g.n_nodes(), 0.0);

  parallel_for(g.n_nodes(), [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> acc1(nx), acc2(nx), sum(nx), sumsq(nx);
    Stencil st1, st2;
    for (std::int64_t node = lo; node < hi; ++node) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(sumsq.begin(), sumsq.end(), 0.0);
      long oob = 0;
      double mw = 0.0;
      for (long k = 0; k < N; ++k) {
        double P;
        if (!sampler.draw(static_cast<int>(node), k, st1, st2, P)) {
          ++oob;
          continue;
        }
        std::fill(acc1.begin(), acc1.end(), 0.0);
        for (int t = 0; t < st1.n; ++t) {
          const double w = st1.w[t];
          const double* row = f.row(st1.idx[t]);
          for (int ix = 0; ix < nx; ++ix) acc1[ix] += w * row[ix];
        }
        std::fill(acc2.begin(), acc2.end(), 0.0);
        for (int t = 0; t < st2.n; ++t) {
          const double w = st2.w[t];
          const double* row = f.row(st2.idx[t]);
          for (int ix = 0; ix < nx; ++ix) acc2[ix] += w * row[ix];
        }
        for (int ix = 0; ix < nx; ++ix) {
          const double val = P * acc1[ix] * acc2[ix];
          sum[ix] += val;
          sumsq[ix] += val * val;
        }
        mw = std::max(mw, P * acc1[0] * acc2[0]);
      }
      double* orow = out.row(static_cast<int>(node));
      for (int ix = 0; ix < nx; ++ix) orow[ix] = sum[ix] / N;
      if (std_error_out) {
        double* erow = std_error_out->row(static_cast<int>(node));
        for (int ix = 0; ix < nx; ++ix) {
          const double var = std::max(0.0, (sumsq[ix] - sum[ix] * sum[ix] / N) / (N - 1));
          erow[ix] = std::sqrt(var / N);
        }
      }
      oob_counts[node] = oob;
      max_w[node] = mw;
    }
  });

  if (stats) {
    long oob_total = 0;
    double mw = 0.0;
    for (int n = 0; n < g.n_nodes(); ++n) {
      oob_total += oob_counts[n];
      mw = std::max(mw, max_w[n]);
    }
    stats->oob_fraction = static_cast<double>(oob_total) / (static_cast<double>(N) * g.n_nodes());
    stats->max_weight = mw;
  }
}

CollisionEstimate gain_term(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                            const ProposalParams& prop, int node, int ix) {
  const long N = quad.n_samples;
  const GainSampler sampler(f, cp, quad, prop);
  Stencil st1, st2;
  double sum = 0, sumsq = 0, sumabs = 0;
  for (long k = 0; k < N; ++k) {
    double P;
    double val = 0.0;
    if (sampler.draw(node, k, st1, st2, P)) val = P * f.eval(st1, ix) * f.eval(st2, ix);
    sum += val;
    sumsq += val * val;
    sumabs += std::fabs(val);
  }
  CollisionEstimate e;
  e.value = sum / N;
  if (N > 1) {
    const double var = std::max(0.0, (sumsq - sum * sum / N) / (N - 1));
    e.std_error = std::sqrt(var / N);
  }
  e.n_eff = sumsq > 0.0 ? sumabs * sumabs / sumsq : 0.0;
  return e;
}

Field gain_field_tensor(const Field& f, const CollisionParams& cp, const QuadratureSpec& quad,
                        const std::vector<int>* nodes) {
  const PhaseGrid& g = f.grid();
  const int nI = g.spec.n_I;
  const int nvn = g.n_vnodes();
  const int nx = f.n_x();
  const double wv3 = g.hv * g.hv * g.hv;

  const Rule1D rule_r = gauss_legendre(quad.nt_r, 0.0, 1.0);
  const Rule1D rule_R = gauss_legendre(quad.nt_R, 0.0, 1.0);
  const Rule1D rule_c = gauss_legendre(quad.nt_cos, -1.0, 1.0);
  const double wphi = kTwoPi / quad.nt_phi;

  // Partner internal-energy rule: dense inside the grid range, plus the tail
  // up to the largest partner energy that can still produce post states with
  // both |v'| inside the box and I' within the I axis.
  const double I_cap = 3.0 * g.spec.v_max * g.spec.v_max + 2.0 * g.spec.I_max;
  Rule1D rule_I = gauss_legendre(std::max(8, 2 * nI), 0.0, g.spec.I_max);
  for (const auto& p : gauss_legendre(6, g.spec.I_max, I_cap)) rule_I.push_back(p);

  std::vector<Vec3> vel(nvn);
  for (int iv = 0; iv < nvn; ++iv) vel[iv] = g.velocity(iv * nI);

  std::vector<int> todo;
  if (nodes) {
    todo = *nodes;
  } else {
    todo.resize(g.n_nodes());
    for (int n = 0; n < g.n_nodes(); ++n) todo[n] = n;
  }

  Field out(g);
  parallel_for(static_cast<std::int64_t>(todo.size()), [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> acc(nx);
    Stencil st1, st2;
    for (std::int64_t t1 = lo; t1 < hi; ++t1) {
      const int n1 = todo[static_cast<std::size_t>(t1)];
      const Vec3 v = vel[n1 / nI];
      const double I = g.I_nodes[n1 % nI];
      double* orow = out.row(n1);
      for (int i2v = 0; i2v < nvn; ++i2v) {
        for (const auto& [Is, wIs] : rule_I) {
          const BLPair pre{v, vel[i2v], I, Is};
          const double g2 = (v - vel[i2v]).norm2();
          const double wpart = wv3 * wIs;
          for (const auto& [R, wR] : rule_R) {
            for (const auto& [r, wr] : rule_r) {
              const double B = cross_section(cp.kernel, g2, I, Is, r, R, cp.gamma);
              const double mw = measure_weight(r, R, I, Is, cp.alpha, cp.mutation);
              for (const auto& [ct, wc] : rule_c) {
                const double stheta = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                for (int ip = 0; ip < quad.nt_phi; ++ip) {
                  const double phi = (ip + 0.5) * kTwoPi / quad.nt_phi;
                  const Vec3 dir{ct, stheta * std::cos(phi), stheta * std::sin(phi)};
                  const BLPair post = bl_forward(pre, {r, R, dir}, cp.mutation);
                  if (!g.stencil(post.v, post.I, cp.alpha, st1) ||
                      !g.stencil(post.vs, post.Is, cp.alpha, st2))
                    continue;
                  double w = wpart * wR * wr * wc * wphi * B * mw;
                  if (cp.alpha > 0.0) w /= std::pow(post.I * post.Is, cp.alpha);
                  std::fill(acc.begin(), acc.end(), 0.0);
                  for (int t = 0; t < st1.n; ++t) {
                    const double ww = st1.w[t];
                    const double* row = f.row(st1.idx[t]);
                    for (int ix = 0; ix < nx; ++ix) acc[ix] += ww * row[ix];
                  }
                  for (int ix = 0; ix < nx; ++ix) {
                    double f2 = 0.0;
                    for (int t = 0; t < st2.n; ++t) f2 += st2.w[t] * f.at(st2.idx[t], ix);
                    orow[ix] += w * acc[ix] * f2;
                  }
                }
              }
            }
          }
        }
      }
    }
  });
  return out;
}

CollisionFieldResult collision_operator(const Field& f, const CollisionParams& cp,
                                        const QuadratureSpec& quad, const ProposalParams& prop) {
  CollisionFieldResult res;
  if (quad.method == QuadratureSpec::Method::tensor)
    res.gain = gain_field_tensor(f, cp, quad);
  else
    gain_field(f, cp, quad, prop, res.gain);
  res.loss = loss_field(f, cp);
  res.q = Field(f.grid());
  for (int node = 0; node < f.n_nodes(); ++node) {
    const double* gr = res.gain.row(node);
    const double* lr = res.loss.row(node);
    const double* fr = f.row(node);
    double* qr = res.q.row(node);
    for (int ix = 0; ix < f.n_x(); ++ix) qr[ix] = gr[ix] - fr[ix] * lr[ix];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Symmetry functional.
// ---------------------------------------------------------------------------

double SymmetryResult::combined_err() const {
  return std::sqrt(lhs_err * lhs_err + rhs_err * rhs_err);
}

double SymmetryResult::discrepancy_sigma() const {
  const double c = combined_err();
  return c > 0.0 ? std::fabs(lhs - rhs) / c : (lhs == rhs ? 0.0 : INFINITY);
}

bool SymmetryResult::consistent(double sigma_limit, double rel_limit) const {
  const double gap = std::fabs(lhs - rhs);
  const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
  if (discrepancy_sigma() > sigma_limit) return false;
  if (scale > 0.0 && gap > rel_limit * scale && gap > 2.0 * combined_err()) return false;
  return true;
}

SymmetryResult symmetry_functional(const Field& f, const CollisionParams& cp,
                                   const ProposalParams& prop,
                                   const std::function<double(const Vec3&, double)>& test_weight,
                                   long n_samples, std::uint64_t seed, int ix) {
  const PhaseGrid& g = f.grid();
  SymmetryResult res;

  // Left estimator, forward route: int phi Q+(f,f) dv dI with the output
  // point (v, I) itself importance-sampled from the proposal, then one
  // production gain sample at that point. This shares the per-sample weight
  // code (and so the angular-measure constant, the transform, the stencils)
  // with the per-node gain path, but targets the continuum functional: no
  // grid quadrature enters.
  {
    const std::uint64_t lhs_seed = seed ^ 0xbb67ae8584caa73bull;
    QuadratureSpec q;
    q.seed = lhs_seed;
    const GainSampler sampler(f, cp, q, prop);
    const double qv_norm = std::pow(kTwoPi * prop.sigma2, -1.5);
    const double inv2s2 = 0.5 / prop.sigma2;
    const double sg = std::sqrt(prop.sigma2);
    const double invImean = 1.0 / prop.Imean;

    double sum = 0.0, sumsq = 0.0;
    Stencil st1, st2;
    for (long k = 0; k < n_samples; ++k) {
      CounterRng rng(lhs_seed, 0, static_cast<std::uint64_t>(k));
      const Vec3 v{prop.u.x + sg * rng.next_gaussian(), prop.u.y + sg * rng.next_gaussian(),
                   prop.u.z + sg * rng.next_gaussian()};
      const double I = rng.next_exponential(prop.Imean);
      double val = 0.0;
      double P = 0.0;
      if (sampler.draw_at(v, I, rng, st1, st2, P)) {
        const double qv = qv_norm * std::exp(-(v - prop.u).norm2() * inv2s2);
        const double qI = invImean * std::exp(-I * invImean);
        val = test_weight(v, I) * P * f.eval(st1, ix) * f.eval(st2, ix) / (qv * qI);
        if (!std::isfinite(val))
          throw NumericError("symmetry_functional: non-finite lhs weight at sample " +
                             std::to_string(k));
      }
      sum += val;
      sumsq += val * val;
    }
    res.lhs = sum / n_samples;
    const double var = std::max(0.0, (sumsq - sum * sum / n_samples) / (n_samples - 1));
    res.lhs_err = std::sqrt(var / n_samples);
  }

  // Right estimator: integrate phi(v', I') f f* B against the parameter
  // measure by sampling the *post* state and walking the collision involution
  // backwards. The change of variables contributes 1/J with
  // J = R^(1/2)(1-R) / (R'^(1/2)(1-R')); the parameter measure is evaluated
  // literally (no symbolic cancellation), so this estimator exercises
  // jacobian_factor and measure_weight operationally.
  {
    const std::uint64_t rhs_seed = seed ^ 0x6a09e667f3bcc909ull;
    const double sg = std::sqrt(prop.sigma2);
    const double qv_norm = std::pow(kTwoPi * prop.sigma2, -1.5);
    const double inv2s2 = 0.5 / prop.sigma2;
    const double invImean = 1.0 / prop.Imean;
    const double beta_R_norm = std::beta(1.5, 2.0 * cp.alpha + 2.0);
    const double beta_r_norm = std::beta(cp.alpha + 1.0, cp.alpha + 1.0);

    double sum = 0.0, sumsq = 0.0;
    Stencil st1, st2;
    for (long k = 0; k < n_samples; ++k) {
      CounterRng rng(rhs_seed, 1, static_cast<std::uint64_t>(k));
      const Vec3 vp{prop.u.x + sg * rng.next_gaussian(), prop.u.y + sg * rng.next_gaussian(),
                    prop.u.z + sg * rng.next_gaussian()};
      const Vec3 vsp{prop.u.x + sg * rng.next_gaussian(), prop.u.y + sg * rng.next_gaussian(),
                     prop.u.z + sg * rng.next_gaussian()};
      const double Ip = rng.next_exponential(prop.Imean);
      const double Isp = rng.next_exponential(prop.Imean);
      const Vec3 dir = rng.next_unit_vector();
      const double Rp = rng.next_beta(1.5, 2.0 * cp.alpha + 2.0);
      const double rp = rng.next_beta(cp.alpha + 1.0, cp.alpha + 1.0);

      const BLPair post{vp, vsp, Ip, Isp};
      // Reconstruct the pre state: the involution is bl_forward applied to the
      // post pair with the sampled parameters.
      const BLPair pre = bl_forward(post, {rp, Rp, dir}, cp.mutation);
      const BLParams rec = bl_inverse(post);  // (r, R) of the pre-state parametrization

      double val = 0.0;
      if (g.stencil(pre.v, pre.I, cp.alpha, st1) && g.stencil(pre.vs, pre.Is, cp.alpha, st2)) {
        const double f1 = f.eval(st1, ix);
        const double f2 = f.eval(st2, ix);
        if (f1 != 0.0 && f2 != 0.0) {
          const double B = cross_section(cp.kernel, (pre.v - pre.vs).norm2(), pre.I, pre.Is,
                                         rec.r, rec.R, cp.gamma);
          const double base = measure_weight(rec.r, rec.R, 1.0, 1.0, cp.alpha, cp.mutation);
          const double J = jacobian_factor(rec.R, Rp, cp.mutation);
          const double qv1 = qv_norm * std::exp(-(vp - prop.u).norm2() * inv2s2);
          const double qv2 = qv_norm * std::exp(-(vsp - prop.u).norm2() * inv2s2);
          const double qI1 = invImean * std::exp(-Ip * invImean);
          const double qI2 = invImean * std::exp(-Isp * invImean);
          const double qR = std::sqrt(Rp) * std::pow(1.0 - Rp, 2.0 * cp.alpha + 1.0) / beta_R_norm;
          double qr = 1.0 / beta_r_norm;
          if (cp.alpha > 0.0) qr *= std::pow(rp * (1.0 - rp), cp.alpha);
          val = test_weight(vp, Ip) * f1 * f2 * B * base * 4.0 * kPi /
                (J * qv1 * qv2 * qI1 * qI2 * qR * qr);
          if (!std::isfinite(val))
            throw NumericError("symmetry_functional: non-finite rhs weight at sample " +
                               std::to_string(k));
        }
      }
      sum += val;
      sumsq += val * val;
    }
    res.rhs = sum / n_samples;
    const double var =
        std::max(0.0, (sumsq - sum * sum / n_samples) / (n_samples - 1));
    res.rhs_err = std::sqrt(var / n_samples);
  }
  return res;
}

}  // namespace slab

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace slab {

/// Nodes/weights for 1-D rules, as (abscissa, weight) pairs.
using Rule1D = std::vector<std::pair<double, double>>;

/// Gauss-Legendre rule on [a,b].
Rule1D gauss_legendre(int n, double a, double b);

/// Gauss-Hermite rule for the weight exp(-x^2) on (-inf,inf).
Rule1D gauss_hermite(int n);

/// Adaptive quadrature (GSL QAGS) of f on [a,b]. Throws NumericError if the
/// integrator fails to reach the requested accuracy.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double epsabs = 0.0, double epsrel = 1e-10);

/// Number of worker threads: the SLAB_THREADS environment variable if set
/// (clamped to [1,256]), otherwise the hardware count.
int worker_thread_count();

/// Statically partitioned parallel loop over [0,n). Each worker receives a
/// contiguous half-open index range; ranges are disjoint, so as long as the
/// body only writes state owned by its indices the result is independent of
/// the number of workers.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace slab

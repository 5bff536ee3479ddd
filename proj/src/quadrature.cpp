#include "slab/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "slab/error.hpp"

namespace slab {

Rule1D gauss_legendre(int n, double a, double b) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
  Rule1D rule(n);
  for (int i = 0; i < n; ++i) {
    double xi, wi;
    gsl_integration_glfixed_point(a, b, i, &xi, &wi, t);
    rule[i] = {xi, wi};
  }
  gsl_integration_glfixed_table_free(t);
  return rule;
}

Rule1D gauss_hermite(int n) {
  gsl_integration_fixed_workspace* w = gsl_integration_fixed_alloc(
      gsl_integration_fixed_hermite, n, 0.0 /*center*/, 1.0 /*t*/, 0.0, 0.0);
  const double* x = gsl_integration_fixed_nodes(w);
  const double* wt = gsl_integration_fixed_weights(w);
  Rule1D rule(n);
  for (int i = 0; i < n; ++i) rule[i] = {x[i], wt[i]};
  gsl_integration_fixed_free(w);
  return rule;
}

namespace {
double call_std_function(double x, void* p) {
  return (*static_cast<const std::function<double(double)>*>(p))(x);
}
}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double epsabs, double epsrel) {
  constexpr std::size_t kLimit = 512;
  gsl_function gf;
  gf.function = &call_std_function;
  gf.params = const_cast<void*>(static_cast<const void*>(&f));

  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(kLimit);
  double result = 0.0, abserr = 0.0;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  int status = gsl_integration_qags(&gf, a, b, epsabs, epsrel, kLimit, ws, &result, &abserr);
  gsl_set_error_handler(old);
  gsl_integration_workspace_free(ws);
  // Round-off reports are benign once the error estimate is already tiny.
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw NumericError("adaptive quadrature failed with GSL status " + std::to_string(status));
  return result;
}

int worker_thread_count() {
  if (const char* env = std::getenv("SLAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n > 256 ? 256 : n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
  const int workers = worker_thread_count();
  if (workers <= 1 || n < 2) {
    body(0, n);
    return;
  }
  const std::int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (int t = 0; t < workers; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace slab

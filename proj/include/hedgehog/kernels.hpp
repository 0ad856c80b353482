#pragma once

#include <cstddef>

// Hot inner loops over structure-of-arrays node data: the five coefficient
// planes of a Q-tensor field plus a quadrature weight per node.  A scalar
// reference implementation always exists; an AVX2 variant is selected at
// runtime when the CPU supports it.  Set HEDGEHOG_SIMD=scalar|avx2|auto to
// override.

namespace hedgehog::kernels {

enum class Backend { scalar, avx2 };

Backend active();
const char* backend_name();
bool avx2_available();
// Throws std::invalid_argument if the requested backend is not available.
void force_backend(Backend b);

// sum_i scale * w[i] * f_bulk(c[.][i]); t, hp as in bulk_density
double bulk_sum(const double* const c[5], const double* w, std::size_t n,
                double t, double hp, double scale);

// g[a][i] = scale * w[i] * d f_bulk / d c_a at node i; returns the weighted sum
double bulk_grad(const double* const c[5], const double* w, std::size_t n,
                 double t, double hp, double scale, double* const g[5]);

// out[a][i] = scale * w[i] * (Hessian of f_bulk at c applied to d)_a
void bulk_hess(const double* const c[5], const double* const d[5],
               const double* w, std::size_t n, double t, double hp,
               double scale, double* const out[5]);

// y += A x with A row-major m x k
void gemv_acc(std::size_t m, std::size_t k, const double* a, const double* x,
              double* y);

double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);

namespace detail {

// both backends exposed for equivalence tests
double scalar_bulk_sum(const double* const c[5], const double* w,
                       std::size_t n, double t, double hp, double scale);
double scalar_bulk_grad(const double* const c[5], const double* w,
                        std::size_t n, double t, double hp, double scale,
                        double* const g[5]);
void scalar_bulk_hess(const double* const c[5], const double* const d[5],
                      const double* w, std::size_t n, double t, double hp,
                      double scale, double* const out[5]);
void scalar_gemv_acc(std::size_t m, std::size_t k, const double* a,
                     const double* x, double* y);
double scalar_dot(const double* x, const double* y, std::size_t n);
void scalar_axpy(double a, const double* x, double* y, std::size_t n);
double scalar_sumsq(const double* x, std::size_t n);

double avx2_bulk_sum(const double* const c[5], const double* w, std::size_t n,
                     double t, double hp, double scale);
double avx2_bulk_grad(const double* const c[5], const double* w, std::size_t n,
                      double t, double hp, double scale, double* const g[5]);
void avx2_bulk_hess(const double* const c[5], const double* const d[5],
                    const double* w, std::size_t n, double t, double hp,
                    double scale, double* const out[5]);
void avx2_gemv_acc(std::size_t m, std::size_t k, const double* a,
                   const double* x, double* y);
double avx2_dot(const double* x, const double* y, std::size_t n);
void avx2_axpy(double a, const double* x, double* y, std::size_t n);
double avx2_sumsq(const double* x, std::size_t n);

// re-read HEDGEHOG_SIMD and redo CPU detection (tests poke the environment)
void reinit_for_tests();

}  // namespace detail

}  // namespace hedgehog::kernels

#include "hedgehog/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace hedgehog::kernels {

namespace detail {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt6 = 2.4494897427831780982;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;
}  // namespace

double scalar_bulk_sum(const double* const c[5], const double* w,
                       std::size_t n, double t, double hp, double scale) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = c[0][i], c1 = c[1][i], c2 = c[2][i], c3 = c[3][i],
                     c4 = c[4][i];
        const double s = c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4;
        const double xx = -c0 * kInvSqrt6 + c4 * kInvSqrt2;
        const double yy = -c0 * kInvSqrt6 - c4 * kInvSqrt2;
        const double zz = 2.0 * c0 * kInvSqrt6;
        const double xy = c1 * kInvSqrt2;
        const double xz = c2 * kInvSqrt2;
        const double yz = c3 * kInvSqrt2;
        const double det = xx * (yy * zz - yz * yz) -
                           xy * (xy * zz - yz * xz) +
                           xz * (xy * yz - yy * xz);
        const double f = (t / 8.0) * (1.0 - s) * (1.0 - s) +
                         (hp / 8.0) * (1.0 + 3.0 * s * s - 12.0 * kSqrt6 * det);
        acc += w[i] * f;
    }
    return scale * acc;
}

double scalar_bulk_grad(const double* const c[5], const double* w,
                        std::size_t n, double t, double hp, double scale,
                        double* const g[5]) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = c[0][i], c1 = c[1][i], c2 = c[2][i], c3 = c[3][i],
                     c4 = c[4][i];
        const double s = c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4;
        const double xx = -c0 * kInvSqrt6 + c4 * kInvSqrt2;
        const double yy = -c0 * kInvSqrt6 - c4 * kInvSqrt2;
        const double zz = 2.0 * c0 * kInvSqrt6;
        const double xy = c1 * kInvSqrt2;
        const double xz = c2 * kInvSqrt2;
        const double yz = c3 * kInvSqrt2;
        const double det = xx * (yy * zz - yz * yz) -
                           xy * (xy * zz - yz * xz) +
                           xz * (xy * yz - yy * xz);
        const double f = (t / 8.0) * (1.0 - s) * (1.0 - s) +
                         (hp / 8.0) * (1.0 + 3.0 * s * s - 12.0 * kSqrt6 * det);
        acc += w[i] * f;

        const double mxx = xx * xx + xy * xy + xz * xz;
        const double myy = xy * xy + yy * yy + yz * yz;
        const double mzz = xz * xz + yz * yz + zz * zz;
        const double mxy = xx * xy + xy * yy + xz * yz;
        const double mxz = xx * xz + xy * yz + xz * zz;
        const double myz = xy * xz + yy * yz + yz * zz;
        const double p0 = (-mxx - myy + 2.0 * mzz) * kInvSqrt6;
        const double p1 = kSqrt2 * mxy;
        const double p2 = kSqrt2 * mxz;
        const double p3 = kSqrt2 * myz;
        const double p4 = (mxx - myy) * kInvSqrt2;

        const double lin = (t / 2.0) * (s - 1.0) + (hp / 8.0) * 12.0 * s;
        const double cub = (hp / 8.0) * 12.0 * kSqrt6;
        const double wi = scale * w[i];
        g[0][i] = wi * (lin * c0 - cub * p0);
        g[1][i] = wi * (lin * c1 - cub * p1);
        g[2][i] = wi * (lin * c2 - cub * p2);
        g[3][i] = wi * (lin * c3 - cub * p3);
        g[4][i] = wi * (lin * c4 - cub * p4);
    }
    return scale * acc;
}

void scalar_bulk_hess(const double* const c[5], const double* const d[5],
                      const double* w, std::size_t n, double t, double hp,
                      double scale, double* const out[5]) {
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = c[0][i], c1 = c[1][i], c2 = c[2][i], c3 = c[3][i],
                     c4 = c[4][i];
        const double d0 = d[0][i], d1 = d[1][i], d2 = d[2][i], d3 = d[3][i],
                     d4 = d[4][i];
        const double s = c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4;
        const double cd = c0 * d0 + c1 * d1 + c2 * d2 + c3 * d3 + c4 * d4;
        const double xx = -c0 * kInvSqrt6 + c4 * kInvSqrt2;
        const double yy = -c0 * kInvSqrt6 - c4 * kInvSqrt2;
        const double zz = 2.0 * c0 * kInvSqrt6;
        const double xy = c1 * kInvSqrt2;
        const double xz = c2 * kInvSqrt2;
        const double yz = c3 * kInvSqrt2;
        const double exx = -d0 * kInvSqrt6 + d4 * kInvSqrt2;
        const double eyy = -d0 * kInvSqrt6 - d4 * kInvSqrt2;
        const double ezz = 2.0 * d0 * kInvSqrt6;
        const double exy = d1 * kInvSqrt2;
        const double exz = d2 * kInvSqrt2;
        const double eyz = d3 * kInvSqrt2;
        // N = Q D + D Q
        const double nxx = 2.0 * (xx * exx + xy * exy + xz * exz);
        const double nyy = 2.0 * (xy * exy + yy * eyy + yz * eyz);
        const double nzz = 2.0 * (xz * exz + yz * eyz + zz * ezz);
        const double nxy =
            xx * exy + xy * eyy + xz * eyz + exx * xy + exy * yy + exz * yz;
        const double nxz =
            xx * exz + xy * eyz + xz * ezz + exx * xz + exy * yz + exz * zz;
        const double nyz =
            xy * exz + yy * eyz + yz * ezz + exy * xz + eyy * yz + eyz * zz;
        const double p0 = (-nxx - nyy + 2.0 * nzz) * kInvSqrt6;
        const double p1 = kSqrt2 * nxy;
        const double p2 = kSqrt2 * nxz;
        const double p3 = kSqrt2 * nyz;
        const double p4 = (nxx - nyy) * kInvSqrt2;

        const double lin = (t / 2.0) * (s - 1.0) + (hp / 8.0) * 12.0 * s;
        const double dir = (t / 2.0) * 2.0 * cd + (hp / 8.0) * 24.0 * cd;
        const double cub = (hp / 8.0) * 12.0 * kSqrt6;
        const double wi = scale * w[i];
        out[0][i] = wi * (lin * d0 + dir * c0 - cub * p0);
        out[1][i] = wi * (lin * d1 + dir * c1 - cub * p1);
        out[2][i] = wi * (lin * d2 + dir * c2 - cub * p2);
        out[3][i] = wi * (lin * d3 + dir * c3 - cub * p3);
        out[4][i] = wi * (lin * d4 + dir * c4 - cub * p4);
    }
}

void scalar_gemv_acc(std::size_t m, std::size_t k, const double* a,
                     const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * k;
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

double scalar_dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void scalar_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double scalar_sumsq(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace detail

namespace {

struct Dispatch {
    double (*bulk_sum)(const double* const[5], const double*, std::size_t,
                       double, double, double);
    double (*bulk_grad)(const double* const[5], const double*, std::size_t,
                        double, double, double, double* const[5]);
    void (*bulk_hess)(const double* const[5], const double* const[5],
                      const double*, std::size_t, double, double, double,
                      double* const[5]);
    void (*gemv_acc)(std::size_t, std::size_t, const double*, const double*,
                     double*);
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
};

const Dispatch kScalar = {
    detail::scalar_bulk_sum, detail::scalar_bulk_grad, detail::scalar_bulk_hess,
    detail::scalar_gemv_acc, detail::scalar_dot,       detail::scalar_axpy,
    detail::scalar_sumsq};

#ifdef HEDGEHOG_BUILD_AVX2
const Dispatch kAvx2 = {
    detail::avx2_bulk_sum, detail::avx2_bulk_grad, detail::avx2_bulk_hess,
    detail::avx2_gemv_acc, detail::avx2_dot,       detail::avx2_axpy,
    detail::avx2_sumsq};
#endif

Dispatch g_table = kScalar;
Backend g_backend = Backend::scalar;

bool cpu_has_avx2() {
#if defined(HEDGEHOG_BUILD_AVX2) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void select(Backend b) {
#ifdef HEDGEHOG_BUILD_AVX2
    if (b == Backend::avx2) {
        g_table = kAvx2;
        g_backend = Backend::avx2;
        return;
    }
#endif
    g_table = kScalar;
    g_backend = Backend::scalar;
}

void init_from_env() {
    const char* env = std::getenv("HEDGEHOG_SIMD");
    Backend want = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    if (env != nullptr && *env != '\0') {
        if (std::strcmp(env, "scalar") == 0) {
            want = Backend::scalar;
        } else if (std::strcmp(env, "avx2") == 0) {
            if (cpu_has_avx2()) {
                want = Backend::avx2;
            } else {
                std::fprintf(stderr,
                             "hedgehog: HEDGEHOG_SIMD=avx2 but AVX2 is not "
                             "available, using scalar\n");
                want = Backend::scalar;
            }
        } else if (std::strcmp(env, "auto") != 0) {
            std::fprintf(stderr,
                         "hedgehog: unknown HEDGEHOG_SIMD value '%s', using "
                         "auto\n",
                         env);
        }
    }
    select(want);
}

struct InitAtLoad {
    InitAtLoad() { init_from_env(); }
} g_init;

}  // namespace

Backend active() { return g_backend; }

const char* backend_name() {
    return g_backend == Backend::avx2 ? "avx2" : "scalar";
}

bool avx2_available() { return cpu_has_avx2(); }

void force_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2())
        throw std::invalid_argument("force_backend: AVX2 not available");
    select(b);
}

void detail::reinit_for_tests() { init_from_env(); }

double bulk_sum(const double* const c[5], const double* w, std::size_t n,
                double t, double hp, double scale) {
    return g_table.bulk_sum(c, w, n, t, hp, scale);
}

double bulk_grad(const double* const c[5], const double* w, std::size_t n,
                 double t, double hp, double scale, double* const g[5]) {
    return g_table.bulk_grad(c, w, n, t, hp, scale, g);
}

void bulk_hess(const double* const c[5], const double* const d[5],
               const double* w, std::size_t n, double t, double hp,
               double scale, double* const out[5]) {
    g_table.bulk_hess(c, d, w, n, t, hp, scale, out);
}

void gemv_acc(std::size_t m, std::size_t k, const double* a, const double* x,
              double* y) {
    g_table.gemv_acc(m, k, a, x, y);
}

double dot(const double* x, const double* y, std::size_t n) {
    return g_table.dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    g_table.axpy(a, x, y, n);
}

double sumsq(const double* x, std::size_t n) { return g_table.sumsq(x, n); }

}  // namespace hedgehog::kernels

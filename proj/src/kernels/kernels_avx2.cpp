#include <immintrin.h>

#include <cstddef>

#include "hedgehog/kernels.hpp"

// AVX2 + FMA implementations, 4 nodes per iteration.  Scalar code in
// kernels.cpp is the reference; keep the arithmetic in the same order per
// lane so the two backends agree to rounding.

namespace hedgehog::kernels::detail {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt6 = 2.4494897427831780982;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

struct BulkPoint {
    __m256d s, det;
    __m256d xx, yy, zz, xy, xz, yz;
};

inline BulkPoint load_point(const __m256d c0, const __m256d c1,
                            const __m256d c2, const __m256d c3,
                            const __m256d c4) {
    const __m256d is6 = _mm256_set1_pd(kInvSqrt6);
    const __m256d is2 = _mm256_set1_pd(kInvSqrt2);
    BulkPoint p;
    p.s = _mm256_mul_pd(c0, c0);
    p.s = _mm256_fmadd_pd(c1, c1, p.s);
    p.s = _mm256_fmadd_pd(c2, c2, p.s);
    p.s = _mm256_fmadd_pd(c3, c3, p.s);
    p.s = _mm256_fmadd_pd(c4, c4, p.s);
    const __m256d a = _mm256_mul_pd(c0, is6);
    const __m256d b = _mm256_mul_pd(c4, is2);
    p.xx = _mm256_sub_pd(b, a);
    p.yy = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_add_pd(a, b));
    p.zz = _mm256_add_pd(a, a);
    p.xy = _mm256_mul_pd(c1, is2);
    p.xz = _mm256_mul_pd(c2, is2);
    p.yz = _mm256_mul_pd(c3, is2);
    const __m256d t1 = _mm256_fmsub_pd(p.yy, p.zz, _mm256_mul_pd(p.yz, p.yz));
    const __m256d t2 = _mm256_fmsub_pd(p.xy, p.zz, _mm256_mul_pd(p.yz, p.xz));
    const __m256d t3 = _mm256_fmsub_pd(p.xy, p.yz, _mm256_mul_pd(p.yy, p.xz));
    p.det = _mm256_mul_pd(p.xx, t1);
    p.det = _mm256_fnmadd_pd(p.xy, t2, p.det);
    p.det = _mm256_fmadd_pd(p.xz, t3, p.det);
    return p;
}

inline __m256d bulk_f(const BulkPoint& p, double t, double hp) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d oms = _mm256_sub_pd(one, p.s);
    const __m256d quart = _mm256_mul_pd(_mm256_set1_pd(t / 8.0),
                                        _mm256_mul_pd(oms, oms));
    __m256d poly = _mm256_fmadd_pd(_mm256_set1_pd(3.0),
                                   _mm256_mul_pd(p.s, p.s), one);
    poly = _mm256_fnmadd_pd(_mm256_set1_pd(12.0 * kSqrt6), p.det, poly);
    return _mm256_fmadd_pd(_mm256_set1_pd(hp / 8.0), poly, quart);
}

}  // namespace

double avx2_bulk_sum(const double* const c[5], const double* w, std::size_t n,
                     double t, double hp, double scale) {
    const std::size_t nv = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const BulkPoint p = load_point(
            _mm256_loadu_pd(c[0] + i), _mm256_loadu_pd(c[1] + i),
            _mm256_loadu_pd(c[2] + i), _mm256_loadu_pd(c[3] + i),
            _mm256_loadu_pd(c[4] + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), bulk_f(p, t, hp), acc);
    }
    double total = hsum(acc);
    if (nv < n) {
        const double* tail[5] = {c[0] + nv, c[1] + nv, c[2] + nv, c[3] + nv,
                                 c[4] + nv};
        total += scalar_bulk_sum(tail, w + nv, n - nv, t, hp, 1.0);
    }
    return scale * total;
}

double avx2_bulk_grad(const double* const c[5], const double* w, std::size_t n,
                      double t, double hp, double scale, double* const g[5]) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d is6 = _mm256_set1_pd(kInvSqrt6);
    const __m256d is2 = _mm256_set1_pd(kInvSqrt2);
    const __m256d vscale = _mm256_set1_pd(scale);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d c0 = _mm256_loadu_pd(c[0] + i);
        const __m256d c1 = _mm256_loadu_pd(c[1] + i);
        const __m256d c2 = _mm256_loadu_pd(c[2] + i);
        const __m256d c3 = _mm256_loadu_pd(c[3] + i);
        const __m256d c4 = _mm256_loadu_pd(c[4] + i);
        const BulkPoint p = load_point(c0, c1, c2, c3, c4);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), bulk_f(p, t, hp), acc);

        // M = Q^2
        const __m256d mxx = _mm256_fmadd_pd(
            p.xx, p.xx,
            _mm256_fmadd_pd(p.xy, p.xy, _mm256_mul_pd(p.xz, p.xz)));
        const __m256d myy = _mm256_fmadd_pd(
            p.xy, p.xy,
            _mm256_fmadd_pd(p.yy, p.yy, _mm256_mul_pd(p.yz, p.yz)));
        const __m256d mzz = _mm256_fmadd_pd(
            p.xz, p.xz,
            _mm256_fmadd_pd(p.yz, p.yz, _mm256_mul_pd(p.zz, p.zz)));
        const __m256d mxy = _mm256_fmadd_pd(
            p.xx, p.xy,
            _mm256_fmadd_pd(p.xy, p.yy, _mm256_mul_pd(p.xz, p.yz)));
        const __m256d mxz = _mm256_fmadd_pd(
            p.xx, p.xz,
            _mm256_fmadd_pd(p.xy, p.yz, _mm256_mul_pd(p.xz, p.zz)));
        const __m256d myz = _mm256_fmadd_pd(
            p.xy, p.xz,
            _mm256_fmadd_pd(p.yy, p.yz, _mm256_mul_pd(p.yz, p.zz)));

        const __m256d p0 = _mm256_mul_pd(
            _mm256_sub_pd(_mm256_add_pd(mzz, mzz), _mm256_add_pd(mxx, myy)),
            is6);
        const __m256d sq2 = _mm256_set1_pd(kSqrt2);
        const __m256d p1 = _mm256_mul_pd(sq2, mxy);
        const __m256d p2 = _mm256_mul_pd(sq2, mxz);
        const __m256d p3 = _mm256_mul_pd(sq2, myz);
        const __m256d p4 = _mm256_mul_pd(_mm256_sub_pd(mxx, myy), is2);

        // lin = (t/2)(s-1) + (hp/8) 12 s
        __m256d lin = _mm256_mul_pd(
            _mm256_set1_pd(t / 2.0),
            _mm256_sub_pd(p.s, _mm256_set1_pd(1.0)));
        lin = _mm256_fmadd_pd(_mm256_set1_pd(hp * 1.5), p.s, lin);
        const __m256d cub = _mm256_set1_pd(hp * 1.5 * kSqrt6);
        const __m256d wi = _mm256_mul_pd(vscale, _mm256_loadu_pd(w + i));

        _mm256_storeu_pd(g[0] + i,
                         _mm256_mul_pd(wi, _mm256_fnmadd_pd(
                                               cub, p0,
                                               _mm256_mul_pd(lin, c0))));
        _mm256_storeu_pd(g[1] + i,
                         _mm256_mul_pd(wi, _mm256_fnmadd_pd(
                                               cub, p1,
                                               _mm256_mul_pd(lin, c1))));
        _mm256_storeu_pd(g[2] + i,
                         _mm256_mul_pd(wi, _mm256_fnmadd_pd(
                                               cub, p2,
                                               _mm256_mul_pd(lin, c2))));
        _mm256_storeu_pd(g[3] + i,
                         _mm256_mul_pd(wi, _mm256_fnmadd_pd(
                                               cub, p3,
                                               _mm256_mul_pd(lin, c3))));
        _mm256_storeu_pd(g[4] + i,
                         _mm256_mul_pd(wi, _mm256_fnmadd_pd(
                                               cub, p4,
                                               _mm256_mul_pd(lin, c4))));
    }
    double total = scale * hsum(acc);
    if (nv < n) {
        const double* tail[5] = {c[0] + nv, c[1] + nv, c[2] + nv, c[3] + nv,
                                 c[4] + nv};
        double* gtail[5] = {g[0] + nv, g[1] + nv, g[2] + nv, g[3] + nv,
                            g[4] + nv};
        total += scalar_bulk_grad(tail, w + nv, n - nv, t, hp, scale, gtail);
    }
    return total;
}

void avx2_bulk_hess(const double* const c[5], const double* const d[5],
                    const double* w, std::size_t n, double t, double hp,
                    double scale, double* const out[5]) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d is6 = _mm256_set1_pd(kInvSqrt6);
    const __m256d is2 = _mm256_set1_pd(kInvSqrt2);
    const __m256d vscale = _mm256_set1_pd(scale);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d c0 = _mm256_loadu_pd(c[0] + i);
        const __m256d c1 = _mm256_loadu_pd(c[1] + i);
        const __m256d c2 = _mm256_loadu_pd(c[2] + i);
        const __m256d c3 = _mm256_loadu_pd(c[3] + i);
        const __m256d c4 = _mm256_loadu_pd(c[4] + i);
        const __m256d d0 = _mm256_loadu_pd(d[0] + i);
        const __m256d d1 = _mm256_loadu_pd(d[1] + i);
        const __m256d d2 = _mm256_loadu_pd(d[2] + i);
        const __m256d d3 = _mm256_loadu_pd(d[3] + i);
        const __m256d d4 = _mm256_loadu_pd(d[4] + i);
        const BulkPoint p = load_point(c0, c1, c2, c3, c4);

        __m256d cd = _mm256_mul_pd(c0, d0);
        cd = _mm256_fmadd_pd(c1, d1, cd);
        cd = _mm256_fmadd_pd(c2, d2, cd);
        cd = _mm256_fmadd_pd(c3, d3, cd);
        cd = _mm256_fmadd_pd(c4, d4, cd);

        const __m256d ea = _mm256_mul_pd(d0, is6);
        const __m256d eb = _mm256_mul_pd(d4, is2);
        const __m256d exx = _mm256_sub_pd(eb, ea);
        const __m256d eyy =
            _mm256_sub_pd(_mm256_setzero_pd(), _mm256_add_pd(ea, eb));
        const __m256d ezz = _mm256_add_pd(ea, ea);
        const __m256d exy = _mm256_mul_pd(d1, is2);
        const __m256d exz = _mm256_mul_pd(d2, is2);
        const __m256d eyz = _mm256_mul_pd(d3, is2);

        // N = Q D + D Q
        __m256d nxx = _mm256_mul_pd(p.xx, exx);
        nxx = _mm256_fmadd_pd(p.xy, exy, nxx);
        nxx = _mm256_fmadd_pd(p.xz, exz, nxx);
        nxx = _mm256_add_pd(nxx, nxx);
        __m256d nyy = _mm256_mul_pd(p.xy, exy);
        nyy = _mm256_fmadd_pd(p.yy, eyy, nyy);
        nyy = _mm256_fmadd_pd(p.yz, eyz, nyy);
        nyy = _mm256_add_pd(nyy, nyy);
        __m256d nzz = _mm256_mul_pd(p.xz, exz);
        nzz = _mm256_fmadd_pd(p.yz, eyz, nzz);
        nzz = _mm256_fmadd_pd(p.zz, ezz, nzz);
        nzz = _mm256_add_pd(nzz, nzz);
        __m256d nxy = _mm256_mul_pd(p.xx, exy);
        nxy = _mm256_fmadd_pd(p.xy, eyy, nxy);
        nxy = _mm256_fmadd_pd(p.xz, eyz, nxy);
        nxy = _mm256_fmadd_pd(exx, p.xy, nxy);
        nxy = _mm256_fmadd_pd(exy, p.yy, nxy);
        nxy = _mm256_fmadd_pd(exz, p.yz, nxy);
        __m256d nxz = _mm256_mul_pd(p.xx, exz);
        nxz = _mm256_fmadd_pd(p.xy, eyz, nxz);
        nxz = _mm256_fmadd_pd(p.xz, ezz, nxz);
        nxz = _mm256_fmadd_pd(exx, p.xz, nxz);
        nxz = _mm256_fmadd_pd(exy, p.yz, nxz);
        nxz = _mm256_fmadd_pd(exz, p.zz, nxz);
        __m256d nyz = _mm256_mul_pd(p.xy, exz);
        nyz = _mm256_fmadd_pd(p.yy, eyz, nyz);
        nyz = _mm256_fmadd_pd(p.yz, ezz, nyz);
        nyz = _mm256_fmadd_pd(exy, p.xz, nyz);
        nyz = _mm256_fmadd_pd(eyy, p.yz, nyz);
        nyz = _mm256_fmadd_pd(eyz, p.zz, nyz);

        const __m256d p0 = _mm256_mul_pd(
            _mm256_sub_pd(_mm256_add_pd(nzz, nzz), _mm256_add_pd(nxx, nyy)),
            is6);
        const __m256d sq2 = _mm256_set1_pd(kSqrt2);
        const __m256d p1 = _mm256_mul_pd(sq2, nxy);
        const __m256d p2 = _mm256_mul_pd(sq2, nxz);
        const __m256d p3 = _mm256_mul_pd(sq2, nyz);
        const __m256d p4 = _mm256_mul_pd(_mm256_sub_pd(nxx, nyy), is2);

        __m256d lin = _mm256_mul_pd(
            _mm256_set1_pd(t / 2.0),
            _mm256_sub_pd(p.s, _mm256_set1_pd(1.0)));
        lin = _mm256_fmadd_pd(_mm256_set1_pd(hp * 1.5), p.s, lin);
        const __m256d dir =
            _mm256_mul_pd(_mm256_set1_pd(t + 3.0 * hp), cd);
        const __m256d cub = _mm256_set1_pd(hp * 1.5 * kSqrt6);
        const __m256d wi = _mm256_mul_pd(vscale, _mm256_loadu_pd(w + i));

        auto emit = [&](double* dst, __m256d dv, __m256d cv, __m256d pv) {
            __m256d r = _mm256_mul_pd(lin, dv);
            r = _mm256_fmadd_pd(dir, cv, r);
            r = _mm256_fnmadd_pd(cub, pv, r);
            _mm256_storeu_pd(dst, _mm256_mul_pd(wi, r));
        };
        emit(out[0] + i, d0, c0, p0);
        emit(out[1] + i, d1, c1, p1);
        emit(out[2] + i, d2, c2, p2);
        emit(out[3] + i, d3, c3, p3);
        emit(out[4] + i, d4, c4, p4);
    }
    if (nv < n) {
        const double* ctail[5] = {c[0] + nv, c[1] + nv, c[2] + nv, c[3] + nv,
                                  c[4] + nv};
        const double* dtail[5] = {d[0] + nv, d[1] + nv, d[2] + nv, d[3] + nv,
                                  d[4] + nv};
        double* otail[5] = {out[0] + nv, out[1] + nv, out[2] + nv, out[3] + nv,
                            out[4] + nv};
        scalar_bulk_hess(ctail, dtail, w + nv, n - nv, t, hp, scale, otail);
    }
}

void avx2_gemv_acc(std::size_t m, std::size_t k, const double* a,
                   const double* x, double* y) {
    const std::size_t kv = k & ~std::size_t(15);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * k;
        __m256d a0 = _mm256_setzero_pd();
        __m256d a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd();
        __m256d a3 = _mm256_setzero_pd();
        for (std::size_t j = 0; j < kv; j += 16) {
            a0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j),
                                 _mm256_loadu_pd(x + j), a0);
            a1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4),
                                 _mm256_loadu_pd(x + j + 4), a1);
            a2 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 8),
                                 _mm256_loadu_pd(x + j + 8), a2);
            a3 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 12),
                                 _mm256_loadu_pd(x + j + 12), a3);
        }
        double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1),
                                      _mm256_add_pd(a2, a3)));
        for (std::size_t j = kv; j < k; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

double avx2_dot(const double* x, const double* y, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(7);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                             a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                             _mm256_loadu_pd(y + i + 4), a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (std::size_t i = nv; i < n; ++i) s += x[i] * y[i];
    return s;
}

void avx2_axpy(double a, const double* x, double* y, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d va = _mm256_set1_pd(a);
    for (std::size_t i = 0; i < nv; i += 4) {
        _mm256_storeu_pd(
            y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    }
    for (std::size_t i = nv; i < n; ++i) y[i] += a * x[i];
}

double avx2_sumsq(const double* x, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(7);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(x + i);
        const __m256d v1 = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
        a1 = _mm256_fmadd_pd(v1, v1, a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (std::size_t i = nv; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace hedgehog::kernels::detail

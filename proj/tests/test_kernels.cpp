#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "hedgehog/kernels.hpp"
#include "hedgehog/qtensor.hpp"
#include "hedgehog/rng.hpp"

using namespace hedgehog;
namespace kd = hedgehog::kernels::detail;

namespace {

struct Field {
    std::vector<double> data[5];
    std::vector<double> w;
    const double* ptrs[5];

    explicit Field(std::size_t n, Rng& rng, double amp = 1.0) {
        for (int a = 0; a < 5; ++a) {
            data[a].resize(n);
            for (auto& v : data[a]) v = amp * rng.gaussian();
            ptrs[a] = data[a].data();
        }
        w.resize(n);
        for (auto& v : w) v = 0.5 + rng.uniform();
    }
};

struct Out5 {
    std::vector<double> data[5];
    double* ptrs[5];
    explicit Out5(std::size_t n) {
        for (int a = 0; a < 5; ++a) {
            data[a].assign(n, 0.0);
            ptrs[a] = data[a].data();
        }
    }
};

}  // namespace

TEST_CASE("scalar bulk kernels match the single-point reference") {
    Rng rng(101);
    const std::size_t n = 37;  // odd on purpose, exercises tails later
    Field f(n, rng);
    const ScalingParams p = ScalingParams::from_t(17.0);

    double expect_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        QTensor q;
        for (int a = 0; a < 5; ++a) q.c[a] = f.data[a][i];
        expect_sum += f.w[i] * bulk_density(q, p);
    }
    const double got =
        kd::scalar_bulk_sum(f.ptrs, f.w.data(), n, p.t, p.h_plus, 2.5);
    CHECK(got == doctest::Approx(2.5 * expect_sum).epsilon(1e-13));

    Out5 g(n);
    const double got2 =
        kd::scalar_bulk_grad(f.ptrs, f.w.data(), n, p.t, p.h_plus, 2.5,
                             g.ptrs);
    CHECK(got2 == doctest::Approx(2.5 * expect_sum).epsilon(1e-13));
    for (std::size_t i = 0; i < n; ++i) {
        QTensor q;
        for (int a = 0; a < 5; ++a) q.c[a] = f.data[a][i];
        const auto gi = bulk_gradient(q, p);
        for (int a = 0; a < 5; ++a)
            CHECK(g.data[a][i] ==
                  doctest::Approx(2.5 * f.w[i] * gi[a]).epsilon(1e-12));
    }

    Field d(n, rng, 0.5);
    Out5 hd(n);
    kd::scalar_bulk_hess(f.ptrs, d.ptrs, f.w.data(), n, p.t, p.h_plus, 2.5,
                         hd.ptrs);
    for (std::size_t i = 0; i < n; ++i) {
        QTensor q;
        std::array<double, 5> dv;
        for (int a = 0; a < 5; ++a) {
            q.c[a] = f.data[a][i];
            dv[a] = d.data[a][i];
        }
        const auto ref = bulk_hessian_apply(q, dv, p);
        for (int a = 0; a < 5; ++a)
            CHECK(hd.data[a][i] ==
                  doctest::Approx(2.5 * f.w[i] * ref[a]).epsilon(1e-12));
    }
}

TEST_CASE("avx2 kernels agree with scalar") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available on this machine, skipping");
        return;
    }
    Rng rng(202);
    for (std::size_t n : {1ul, 4ul, 7ul, 64ul, 1003ul}) {
        Field f(n, rng);
        Field d(n, rng, 0.3);
        const double t = 29.0, hp = ScalingParams::from_t(29.0).h_plus;

        const double s1 = kd::scalar_bulk_sum(f.ptrs, f.w.data(), n, t, hp, 1.5);
        const double s2 = kd::avx2_bulk_sum(f.ptrs, f.w.data(), n, t, hp, 1.5);
        CHECK(s2 == doctest::Approx(s1).epsilon(5e-13));

        Out5 g1(n), g2(n);
        const double e1 =
            kd::scalar_bulk_grad(f.ptrs, f.w.data(), n, t, hp, 1.5, g1.ptrs);
        const double e2 =
            kd::avx2_bulk_grad(f.ptrs, f.w.data(), n, t, hp, 1.5, g2.ptrs);
        CHECK(e2 == doctest::Approx(e1).epsilon(5e-13));
        for (int a = 0; a < 5; ++a)
            for (std::size_t i = 0; i < n; ++i)
                CHECK(g2.data[a][i] ==
                      doctest::Approx(g1.data[a][i]).epsilon(5e-12).scale(1.0));

        Out5 h1(n), h2(n);
        kd::scalar_bulk_hess(f.ptrs, d.ptrs, f.w.data(), n, t, hp, 1.5,
                             h1.ptrs);
        kd::avx2_bulk_hess(f.ptrs, d.ptrs, f.w.data(), n, t, hp, 1.5,
                           h2.ptrs);
        for (int a = 0; a < 5; ++a)
            for (std::size_t i = 0; i < n; ++i)
                CHECK(h2.data[a][i] ==
                      doctest::Approx(h1.data[a][i]).epsilon(5e-12).scale(1.0));
    }
}

TEST_CASE("avx2 vector helpers agree with scalar") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available on this machine, skipping");
        return;
    }
    Rng rng(303);
    for (std::size_t n : {1ul, 8ul, 15ul, 17ul, 513ul}) {
        std::vector<double> x(n), y(n), y2(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.gaussian();
            y[i] = rng.gaussian();
        }
        y2 = y;
        CHECK(kd::avx2_dot(x.data(), y.data(), n) ==
              doctest::Approx(kd::scalar_dot(x.data(), y.data(), n))
                  .epsilon(1e-13));
        CHECK(kd::avx2_sumsq(x.data(), n) ==
              doctest::Approx(kd::scalar_sumsq(x.data(), n)).epsilon(1e-13));
        kd::scalar_axpy(0.37, x.data(), y.data(), n);
        kd::avx2_axpy(0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(y2[i] == doctest::Approx(y[i]).epsilon(1e-14));
    }

    // gemv against the naive loop, ragged shapes
    const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
        {3, 5}, {8, 16}, {5, 33}, {16, 100}, {1, 1}};
    for (auto [m, k] : shapes) {
        std::vector<double> a(m * k), x(k), y1(m, 0.1), y2(m, 0.1);
        for (auto& v : a) v = rng.gaussian();
        for (auto& v : x) v = rng.gaussian();
        kd::scalar_gemv_acc(m, k, a.data(), x.data(), y1.data());
        kd::avx2_gemv_acc(m, k, a.data(), x.data(), y2.data());
        for (std::size_t i = 0; i < m; ++i)
            CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(5e-13).scale(1.0));
    }
}

TEST_CASE("backend dispatch honours HEDGEHOG_SIMD") {
    setenv("HEDGEHOG_SIMD", "scalar", 1);
    kd::reinit_for_tests();
    CHECK(kernels::active() == kernels::Backend::scalar);

    setenv("HEDGEHOG_SIMD", "auto", 1);
    kd::reinit_for_tests();
    if (kernels::avx2_available())
        CHECK(kernels::active() == kernels::Backend::avx2);
    else
        CHECK(kernels::active() == kernels::Backend::scalar);

    if (kernels::avx2_available()) {
        kernels::force_backend(kernels::Backend::scalar);
        CHECK(kernels::active() == kernels::Backend::scalar);
        kernels::force_backend(kernels::Backend::avx2);
        CHECK(kernels::active() == kernels::Backend::avx2);
    } else {
        CHECK_THROWS_AS(kernels::force_backend(kernels::Backend::avx2),
                        std::invalid_argument);
    }

    unsetenv("HEDGEHOG_SIMD");
    kd::reinit_for_tests();
    CHECK(std::string(kernels::backend_name()) ==
          (kernels::avx2_available() ? "avx2" : "scalar"));
}

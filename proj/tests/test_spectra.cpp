#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hedgehog/rng.hpp"
#include "hedgehog/spectra.hpp"

using namespace hedgehog;

namespace {

// half-period sine bump on the profile grid, endpoints pinned to zero
std::vector<double> sine_bump(const std::vector<double>& r, int k) {
    const double R = r.back();
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        v[i] = std::sin(std::numbers::pi * k * (r[i] - 1.0) / (R - 1.0));
    v.front() = 0.0;
    v.back() = 0.0;
    return v;
}

ModeFunctions smooth_modes(double R, std::size_t N, std::uint64_t seed) {
    ModeFunctions mf;
    const double dr = (R - 1.0) / static_cast<double>(N - 1);
    mf.r.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        mf.r[i] = 1.0 + dr * static_cast<double>(i);
    mf.r[N - 1] = R;
    Rng rng(seed);
    std::vector<double>* comp[3] = {&mf.v0, &mf.v2, &mf.v4};
    for (auto* c : comp) {
        c->assign(N, 0.0);
        for (int k = 1; k <= 4; ++k) {
            const double amp = rng.gaussian() / k;
            const std::vector<double> b = sine_bump(mf.r, k);
            for (std::size_t i = 0; i < N; ++i) (*c)[i] += amp * b[i];
        }
    }
    return mf;
}

}  // namespace

TEST_CASE("coefficient functions match their displays and identities") {
    for (double t : {0.0, 1.0, 5.0, 100.0}) {
        const ScalingParams p = ScalingParams::from_t(t);
        const auto at1 = coefficient_functions(1.0, p);
        CHECK(at1.f2 == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        CHECK(at1.f4 == doctest::Approx(4.5 * p.h_plus).epsilon(1e-14));
        CHECK(at1.f0 == doctest::Approx(t + 1.5 * p.h_plus).epsilon(1e-14));
        const auto at0 = coefficient_functions(0.0, p);
        CHECK(at0.f0 == doctest::Approx(-0.5 * t).scale(1.0).epsilon(1e-14));
        CHECK(at0.f2 == doctest::Approx(-0.5 * t).scale(1.0).epsilon(1e-14));
        CHECK(at0.f4 == doctest::Approx(-0.5 * t).scale(1.0).epsilon(1e-14));
    }

    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const double t = 200.0 * rng.uniform();
        const double h = -1.0 + 3.0 * rng.uniform();
        const ScalingParams p = ScalingParams::from_t(t);
        const auto c = coefficient_functions(h, p);
        const double f = f_of_h(h, p);
        const double hp = p.h_plus;
        const double lhs0 = c.f0;
        const double rhs0 = f + t * h * h + 1.5 * hp * (2.0 * h * h - h);
        CHECK(std::fabs(lhs0 - rhs0) <=
              1e-12 * std::max(1.0, std::fabs(rhs0)));
        const double rhs4 = f + 4.5 * hp * h;
        CHECK(std::fabs(c.f4 - rhs4) <=
              1e-12 * std::max(1.0, std::fabs(rhs4)));
    }
}

TEST_CASE("hardy eigenvalues match the euler-equation closed form") {
    for (double R : {1.5, std::exp(1.0), 5.0}) {
        const double num = hardy_lambda1(R);
        const double closed = hardy_closed_form(R, 1);
        CHECK(num == doctest::Approx(closed).epsilon(1e-8));
    }
    CHECK(hardy_lambda1(1.5) == doctest::Approx(60.2834).epsilon(1e-5));
    CHECK(hardy_lambda1(5.0) == doctest::Approx(4.0602).epsilon(1e-4));

    // at R = e the printed formula coincides with the corrected one
    const double Re = std::exp(1.0);
    CHECK(hardy_printed_form(Re, 1) ==
          doctest::Approx(hardy_closed_form(Re, 1)).epsilon(1e-12));
    CHECK(hardy_lambda1(Re) ==
          doctest::Approx(std::numbers::pi * std::numbers::pi + 0.25)
              .epsilon(1e-8));

    // ordering and the uniform lower bound 1/4
    double prev = 0.0;
    for (int k = 1; k <= 5; ++k) {
        const double lam = hardy_eigen(2.0, k, 2049);
        CHECK(lam > prev);
        prev = lam;
    }
    for (double R : {1.1, 1.5, 3.0, 10.0, 50.0})
        CHECK(hardy_lambda1(R) > 0.25);
}

TEST_CASE("hardy report flags the matching closed form") {
    const HardyReport at5 = hardy_report(5.0);
    CHECK(at5.matches_corrected);
    CHECK_FALSE(at5.matches_printed);
    CHECK(at5.rel_err_corrected < 1e-8);
    CHECK(at5.rel_err_printed > 0.1);

    const HardyReport ate = hardy_report(std::exp(1.0));
    CHECK(ate.matches_corrected);
    CHECK(ate.matches_printed);
}

TEST_CASE("hardy discretization is second order") {
    const double closed = hardy_closed_form(5.0, 1);
    const double e1 = std::fabs(hardy_eigen(5.0, 1, 1025) - closed);
    const double e2 = std::fabs(hardy_eigen(5.0, 1, 2049) - closed);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("wirtinger constant and its discrete companion") {
    CHECK(wirtinger_const(2.0) ==
          doctest::Approx(std::numbers::pi * std::numbers::pi)
              .epsilon(1e-15));
    for (double R : {1.5, 2.0, 3.0}) {
        const double extrap = wirtinger_eigen(R, 2049) +
                              (wirtinger_eigen(R, 2049) -
                               wirtinger_eigen(R, 1025)) /
                                  3.0;
        CHECK(extrap == doctest::Approx(wirtinger_const(R)).epsilon(1e-8));
    }
}

TEST_CASE("profile-weighted rewriting agrees between both displays") {
    const ScalingParams p = ScalingParams::from_t(5.0);
    const HedgehogProfile coarse = solve_profile(1.5, p, 2049);
    const HedgehogProfile fine = solve_profile(1.5, p, 4097);

    const std::vector<double> zero(fine.r.size(), 0.0);
    const auto both0 = hardy_transform_check(1.0, 6.0, 0.0, zero, fine);
    CHECK(both0.first == 0.0);
    CHECK(both0.second == 0.0);

    const auto agree = [](const HedgehogProfile& prof, double a, double b,
                          double c) {
        std::vector<double> v = sine_bump(prof.r, 1);
        const std::vector<double> v2 = sine_bump(prof.r, 3);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.4 * v2[i];
        const auto lr = hardy_transform_check(a, b, c, v, prof);
        return std::fabs(lr.first - lr.second);
    };

    CHECK(agree(fine, 1.0, 6.0, 0.0) < 3e-7);
    CHECK(agree(fine, 0.7, 2.0, 1.3) < 1e-6);

    const double dcoarse = agree(coarse, 0.7, 2.0, 1.3);
    const double dfine = agree(fine, 0.7, 2.0, 1.3);
    const double ratio = dcoarse / dfine;
    CHECK(ratio > 2.5);
    CHECK(ratio < 6.0);
}

TEST_CASE("phi mode functionals reproduce the displayed coefficients") {
    const ScalingParams p = ScalingParams::from_t(5.0);
    const HedgehogProfile prof = solve_profile(1.5, p, 2049);

    ModeFunctions zero = smooth_modes(1.5, 513, 1);
    for (auto* c : {&zero.v0, &zero.v2, &zero.v4})
        std::fill(c->begin(), c->end(), 0.0);
    CHECK(phi_mode(0, prof, zero) == 0.0);
    CHECK(phi_mode(3, prof, zero) == 0.0);

    // i = 1 ignores v4 exactly, its coefficients all vanish
    ModeFunctions mf = smooth_modes(1.5, 513, 2);
    ModeFunctions nov4 = mf;
    std::fill(nov4.v4.begin(), nov4.v4.end(), 0.0);
    CHECK(phi_mode(1, prof, mf) == phi_mode(1, prof, nov4));

    // i = 2 cross terms by polarization at a single node
    const std::size_t N = 513;
    const std::size_t q = 200;
    const double dr = 0.5 / static_cast<double>(N - 1);
    ModeFunctions probe = smooth_modes(1.5, N, 3);
    for (auto* c : {&probe.v0, &probe.v2, &probe.v4})
        std::fill(c->begin(), c->end(), 0.0);
    auto with = [&](double a0, double a2, double a4) {
        ModeFunctions m = probe;
        m.v0[q] = a0;
        m.v2[q] = a2;
        m.v4[q] = a4;
        return phi_mode(2, prof, m);
    };
    const double cross02 =
        with(1.0, 1.0, 0.0) - with(1.0, 0.0, 0.0) - with(0.0, 1.0, 0.0);
    CHECK(cross02 == doctest::Approx(-24.0 * dr).epsilon(1e-8));
    const double cross24 =
        with(0.0, 1.0, 1.0) - with(0.0, 1.0, 0.0) - with(0.0, 0.0, 1.0);
    CHECK(cross24 == doctest::Approx(16.0 * dr).epsilon(1e-8));
}

TEST_CASE("step-zero form after substituting v0 = h w0") {
    const ScalingParams p = ScalingParams::from_t(5.0);
    const HedgehogProfile prof = solve_profile(1.5, p, 4097);
    const std::size_t N = 4097;

    ModeFunctions mf;
    mf.r = prof.r;
    mf.v2.assign(N, 0.0);
    mf.v4.assign(N, 0.0);
    const std::vector<double> w0 = sine_bump(prof.r, 2);
    mf.v0.resize(N);
    for (std::size_t i = 0; i < N; ++i) mf.v0[i] = prof.h[i] * w0[i];

    const double direct = phi_mode(0, prof, mf);

    // (2/3) int h^2 [ w0'^2 + (t h^2 + (3 h_plus/2)(2h^2 - h)) w0^2 ] r^2 dr
    const double dr = prof.r[1] - prof.r[0];
    double sub = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double rf = 0.5 * (prof.r[i] + prof.r[i + 1]);
        const double hf = 0.5 * (prof.h[i] + prof.h[i + 1]);
        const double dw = w0[i + 1] - w0[i];
        sub += hf * hf * rf * rf * dw * dw / dr;
    }
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const double h = prof.h[i];
        const double gam =
            p.t * h * h + 1.5 * p.h_plus * (2.0 * h * h - h);
        sub += dr * prof.r[i] * prof.r[i] * h * h * gam * w0[i] * w0[i];
    }
    sub *= 2.0 / 3.0;

    CHECK(std::fabs(direct - sub) < 1e-5 * std::max(1.0, std::fabs(direct)));
}

TEST_CASE("mode eigenvalues at the wide-shell benchmark") {
    const ScalingParams p = ScalingParams::from_t(0.0);
    const HedgehogProfile prof = solve_profile(5.0, p, 2049);
    const double e0 = phi_mode_min_eig(0, prof, 2049);
    const double e1 = phi_mode_min_eig(1, prof, 2049);
    const double e2 = phi_mode_min_eig(2, prof, 2049);
    CHECK(e0 == doctest::Approx(0.986).epsilon(5e-3));
    CHECK(e1 == doctest::Approx(0.4955).epsilon(5e-3));
    CHECK(e2 == doctest::Approx(0.7045).epsilon(5e-3));
    CHECK(e0 > 0.0);
    CHECK(e1 > 0.0);
    CHECK(e2 > 0.0);
}

TEST_CASE("mode eigenvalues converge second order under refinement") {
    const ScalingParams p = ScalingParams::from_t(0.0);
    const HedgehogProfile prof = solve_profile(5.0, p, 4097);
    const double a = phi_mode_min_eig(1, prof, 801);
    const double b = phi_mode_min_eig(1, prof, 1601);
    const double c = phi_mode_min_eig(1, prof, 3201);
    const double ratio = std::fabs(a - b) / std::fabs(b - c);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.5);
}

TEST_CASE("mode positivity in the narrow shell at large t") {
    const ScalingParams p = ScalingParams::from_t(100.0);
    const HedgehogProfile prof = solve_profile(1.5, p, 1601);
    for (int i : {0, 1, 2, 3, 4})
        CHECK(phi_mode_min_eig(i, prof, 1601) > 0.0);
}

TEST_CASE("rayleigh quotient of any trial modes dominates the minimum") {
    const ScalingParams p = ScalingParams::from_t(0.0);
    const HedgehogProfile prof = solve_profile(5.0, p, 1601);
    const std::size_t N = 1601;
    const double emin = phi_mode_min_eig(2, prof, N);
    const double dr = 4.0 / static_cast<double>(N - 1);
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const ModeFunctions mf = smooth_modes(5.0, N, seed);
        double mass = 0.0;
        for (std::size_t i = 1; i + 1 < N; ++i)
            mass += dr * mf.r[i] * mf.r[i] *
                    (mf.v0[i] * mf.v0[i] + mf.v2[i] * mf.v2[i] +
                     mf.v4[i] * mf.v4[i]);
        CHECK(phi_mode(2, prof, mf) >= (emin - 1e-10) * mass);
    }
}

namespace {

QField nodal_difference(const QField& a, const QField& b) {
    QField d = a;
    for (int pl = 0; pl < 5; ++pl)
        for (std::size_t n = 0; n < d.nodes; ++n)
            d.c[pl][n] -= b.c[pl][n];
    return d;
}

}  // namespace

TEST_CASE("full second variation eigenvalue is positive and reproducible") {
    const ScalingParams p = ScalingParams::from_t(5.0);
    const ShellModel model(ShellGrid::make(1.5, 14, 8, 16), p);
    const double lam = full_dsq_min_eig(model);
    CHECK(lam > 0.0);
    CHECK(lam == full_dsq_min_eig(model));

    // wrapper agrees with the model form
    const QField v =
        nodal_difference(random_admissible(model, 0.3, 5), model.hedgehog_field());
    CHECK(second_variation(model, v) == model.second_variation_form(v));
}

TEST_CASE("stability threshold estimates vanish in the tested geometries") {
    TStarOptions small;
    small.mode_nodes = 801;
    small.full_nr = 14;
    small.full_ntheta = 8;
    small.full_nphi = 16;
    CHECK(t_star_estimate(1.5, small) == 0.0);

    TStarOptions modes_only = small;
    modes_only.include_full = false;
    for (double R : {3.0, 5.0, 8.0})
        CHECK(t_star_estimate(R, modes_only) == 0.0);
}

TEST_CASE("improved bound functional stays nonnegative at large t") {
    const ScalingParams p = ScalingParams::from_t(2000.0);
    const ShellModel model(ShellGrid::make(1.5, 16, 8, 16), p);
    const QField hedge = model.hedgehog_field();

    QField zero = make_field(model.grid());
    CHECK(improved_bound_gap(model, zero, 0.4, 1.0) == 0.0);

    CHECK_THROWS_AS(improved_bound_gap(model, zero, 0.0, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(improved_bound_gap(model, zero, 0.5, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(improved_bound_gap(model, zero, 0.4, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(improved_bound_gap(model, zero, 0.4, 4.5),
                    std::domain_error);

    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
        const QField v =
            nodal_difference(random_admissible(model, 0.3, seed), hedge);
        CHECK(improved_bound_gap(model, v, 0.4, 1.0) >= 0.0);
    }
}

TEST_CASE("subtracted coefficient identities behind the improved bound") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const double t = 100.0 + 1900.0 * rng.uniform();
        const double h = rng.uniform();
        const double alpha = 0.499 * rng.uniform(0.01, 1.0);
        const double beta = 4.49 * rng.uniform(0.01, 1.0);
        const ScalingParams p = ScalingParams::from_t(t);
        const auto c = coefficient_functions(h, p);
        const double f = f_of_h(h, p);
        const double hp = p.h_plus;
        const double lhs0 = c.f0 - t * h * h - 3.0 * alpha * hp;
        const double rhs0 = f + 1.5 * hp * (2.0 * h * h - h - 2.0 * alpha);
        CHECK(std::fabs(lhs0 - rhs0) <=
              1e-11 * std::max(1.0, std::fabs(rhs0)));
        const double lhs4 = c.f4 - beta * hp;
        const double rhs4 = f + hp * (4.5 * h - beta);
        CHECK(std::fabs(lhs4 - rhs4) <=
              1e-11 * std::max(1.0, std::fabs(rhs4)));
    }
}

TEST_CASE("stability report assembles verdicts and serializes") {
    StabilityOptions opts;
    opts.i_max = 2;
    opts.mode_nodes = 801;
    opts.full_nr = 14;
    opts.full_ntheta = 8;
    opts.full_nphi = 16;

    const StabilityReport rep = stability_report(1.5, 0.0, opts);
    CHECK(rep.R == 1.5);
    CHECK(rep.t == 0.0);
    CHECK(rep.mode_eigs.size() == 3);
    for (double e : rep.mode_eigs) CHECK(e > 0.0);
    CHECK(rep.full_dsq_min > 0.0);
    CHECK(rep.stable);
    CHECK(rep.hardy_lambda1 ==
          doctest::Approx(hardy_closed_form(1.5, 1)).epsilon(1e-6));
    CHECK(rep.wirtinger == wirtinger_const(1.5));

    const StabilityReport rep2 = stability_report(2.0, 10.0, opts);
    const std::vector<StabilityReport> rows = {rep, rep2};

    const char* csv_path = "stability_report_test.csv";
    const char* json_path = "stability_report_test.json";
    write_stability_csv(csv_path, rows);
    write_stability_json(json_path, rows, opts);

    std::ifstream in(csv_path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "R,t,lambda_min_i0,lambda_min_i1,lambda_min_i2,hardy_lambda1,"
          "full_dsq_min,verdict");
    std::string row;
    REQUIRE(std::getline(in, row));
    REQUIRE(row.size() > 7);
    CHECK(row.compare(row.size() - 7, 7, ",stable") == 0);
    std::size_t commas = 0;
    for (char ch : row)
        if (ch == ',') ++commas;
    CHECK(commas == 7);
    REQUIRE(std::getline(in, row));
    CHECK_FALSE(std::getline(in, row));
    in.close();

    std::ifstream jin(json_path);
    nlohmann::json doc = nlohmann::json::parse(jin);
    jin.close();
    CHECK(doc["settings"]["i_max"] == 2);
    CHECK(doc["settings"]["mode_nodes"] == 801);
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["rows"][0]["R"] == 1.5);
    CHECK(doc["rows"][0]["verdict"] == "stable");
    CHECK(doc["rows"][0]["mode_eigs"].size() == 3);
    CHECK(doc["rows"][1]["R"] == 2.0);
    CHECK(doc["rows"][1]["t"] == 10.0);

    std::remove(csv_path);
    std::remove(json_path);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace hedgehog {

using Rational = mpq_class;

// Element of Q[sqrt(6)]: a + b*sqrt(6) with rational a, b.  Since sqrt(6)
// is irrational the representation is unique, so equality and sign tests
// are exact.
struct Q6 {
    Rational a{0};
    Rational b{0};

    Q6() = default;
    Q6(Rational ra, Rational rb) : a(std::move(ra)), b(std::move(rb)) {}
    static Q6 rational(Rational r) { return {std::move(r), Rational(0)}; }
    static Q6 root6(Rational r) { return {Rational(0), std::move(r)}; }

    bool is_zero() const { return a == 0 && b == 0; }
    // -1, 0, +1 for the sign of the real number a + b*sqrt(6).
    int sign() const;
    double to_double() const;

    Q6 operator-() const { return {-a, -b}; }
    Q6 operator+(const Q6& o) const { return {a + o.a, b + o.b}; }
    Q6 operator-(const Q6& o) const { return {a - o.a, b - o.b}; }
    Q6 operator*(const Q6& o) const {
        return {a * o.a + 6 * b * o.b, a * o.b + b * o.a};
    }
    Q6 inverse() const;  // throws std::domain_error on zero
    Q6 operator/(const Q6& o) const { return *this * o.inverse(); }
    bool operator==(const Q6& o) const { return a == o.a && b == o.b; }
    bool operator!=(const Q6& o) const { return !(*this == o); }
};

// Coefficients of a traceless symmetric perturbation in the moving frame
// attached to the radial direction: w0 along the hedgehog axis, w1/w2 the
// shear modes, w3/w4 the transverse pair.
struct WVector {
    double w0 = 0, w1 = 0, w2 = 0, w3 = 0, w4 = 0;

    double norm2() const {
        return (2.0 / 3.0) * w0 * w0 +
               2.0 * (w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4);
    }
};

// Cubic comparison functional: the fully expanded polynomial in the frame
// coefficients.  psi_from_tensor evaluates the defining expression
// -(sqrt(6)/2) tr W^3 - w0^2/2 + (9/2)(w3^2 + w4^2) by assembling the
// tensor; the two must agree to roundoff and the tests hold them together.
double psi(const WVector& w);
double psi_from_tensor(const WVector& w);

// Rotates the shear pair and the transverse pair to the extremal phase:
// (w0, sqrt(w1^2+w2^2), 0, 0, sqrt(w3^2+w4^2)) never increases psi.
WVector psi_reduce(const WVector& w);

// Builds the equality witness for psi_reduce at given amplitudes: the
// phase choice phi1 = pi/4, phi2 = 0 attains the reduced value exactly.
WVector psi_reduce_witness(double w0, double rho, double theta);

// Normalised deviation of the perturbed tensor from the unit orbit:
// eps = |H/h + W|^2 - 1, which expands to 2 (H/h).W + |W|^2 and is
// therefore >= -1 for every W.
double w_eps(const WVector& w);

struct CubicNormalForm {
    double X;    // sqrt(2/3) (w0 + 3 w4)
    double eps;  // w_eps of the input
};

// For w2 = w3 = 0 the functional collapses to a cubic in the single
// variable X at fixed eps: psi = (X^3 + 3 X^2 - 3 eps X) / 4, and
// Cauchy-Schwarz confines X to |X + 1| <= 2 sqrt(1 + eps).
// Throws std::domain_error when w2 or w3 is nonzero.
CubicNormalForm change_of_vars(const WVector& w);

// Lower envelope of the cubic over the admissible X range, written in the
// factored form (1 + eps) (sqrt(1 + eps) - 1)^2 / 4 which is manifestly
// nonnegative and does not cancel near eps = 0.  g_displayed is the
// expanded form eps^2/4 + 3 eps/4 + 1/2 - (1 + eps)^{3/2}/2; g_prime the
// derivative.  All throw std::domain_error for eps < -1.
double G(double eps);
double g_displayed(double eps);
double g_prime(double eps);

// Pointwise positivity statement behind the energy comparison: returns
// psi(w) + (3h/8) (2 (H/h).W + |W|^2)^2, which is nonnegative once
// h >= 2/3.  Throws std::domain_error for h < 2/3.  At h = 2/3 the value
// dominates G(w_eps(w)).
double psi_positive_check(const WVector& w, double h);

// Quartic comparison density in the reduced variables (v0, v1, v4); the
// literal coefficient 5 on the constraint square is part of the
// definition.  varphi_full is the same density on all five components.
double varphi(double v0, double v1, double v4, double h);
double varphi_full(const WVector& v, double h);

// Exact classification of the critical-point system of varphi at fixed h,
// run branch by branch in Q[sqrt(6)].  A branch is "excluded" when its
// real solvability certificate fails: negative y^2 on the y != 0 branch,
// negative discriminant on the other two.
struct CriticalDiagnostics {
    Rational h;

    // y != 0 branch: the linear pair fixes (x, z) uniquely; y2 is the
    // value forced for y^2.
    Q6 x0, z0;
    Rational y2;
    bool closed_form_match = false;      // solved (x0, z0) equal the
                                         // rational closed forms
    bool reduced_residual_zero = false;  // (x0, z0) satisfy the linear pair
    bool full_residual_zero = false;     // (x0, z0, y2) zero the original
                                         // three gradient equations
    bool y_branch_excluded = false;

    // y = 0, z != 0 branch: quadratic in x; keeps a real root only when
    // the discriminant is nonnegative.
    Rational z_branch_disc;
    bool z_branch_excluded = false;

    // y = z = 0 branch: quadratic factor of the cubic in x.
    Rational x_branch_disc;
    bool x_branch_excluded = false;

    bool all_excluded = false;
};

CriticalDiagnostics critical_system(const Rational& h);

// Smallest h in [0, 1] from which every nontrivial critical branch stays
// excluded, located by scanning `samples` rational points and bisecting
// the first sign change to width `tol`.  Returns 0 when the predicate
// holds on the whole interval.
double h_star_estimate(int samples, double tol);

// Monte Carlo verification of the inequalities above.  worst_margin is
// the minimum over samples of the quantity that must stay >= -tol; pass
// records whether it did.  Sampling is split into 64 fixed shards with
// per-shard seeds, so results are independent of the thread count.
struct LemmaResult {
    std::string name;
    bool pass = false;
    double worst_margin = 0;
    double tol = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

std::vector<LemmaResult> run_lemma_suite(std::uint64_t samples,
                                         std::uint64_t seed);

}  // namespace hedgehog

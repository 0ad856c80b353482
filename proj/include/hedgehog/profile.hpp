#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hedgehog/linalg.hpp"
#include "hedgehog/qtensor.hpp"

namespace hedgehog {

// Scalar coupling of the radial equation
//   h'' + (2/r) h' - (6/r^2) h = h f(h),  h(1) = h(R) = 1,
// with f(h) = (t/2)(h^2 - 1) + (3 h_plus/2)(h^2 - h).
double f_of_h(double h, const ScalingParams& p);
double df_of_h(double h, const ScalingParams& p);

struct SolveError : std::runtime_error {
    SolveError(const std::string& msg, std::vector<double> it, double res)
        : std::runtime_error(msg), iterate(std::move(it)), residual(res) {}
    std::vector<double> iterate;
    double residual;
};

class HedgehogProfile {
public:
    double R = 0.0;
    ScalingParams params;
    std::vector<double> r, h, dh;
    double residual = 0.0;  // max-norm of the collocation residual at h

    // cubic-interpolated evaluation between nodes
    double h_at(double rr) const { return spline_.eval(rr); }
    double dh_at(double rr) const { return spline_.deriv(rr); }
    double d2h_at(double rr) const { return spline_.second_deriv(rr); }

    void finish();  // rebuilds dh and the spline from (r, h)

private:
    linalg::CubicSpline spline_;
};

// Damped-Newton collocation solve on a uniform grid with n nodes, with
// continuation in t (steps of at most 5).  Throws SolveError if Newton
// stalls above tol.
HedgehogProfile solve_profile(double R, const ScalingParams& p,
                              std::size_t n = 2049, double tol = 1e-11);

// Reduced radial energy
//   E[h] = int_1^R { h'^2/2 + 3 h^2/r^2
//                    + (t/8)(1-h^2)^2 + (h_plus/8)(1+3h^4-4h^3) } r^2 dr
// by the trapezoid rule on the profile's grid.
double profile_energy(const HedgehogProfile& prof);

// Comparison profile solving the homogeneous equation r^2 y'' + 2r y' = 6y
// with y(1) = y(R) = 1, and its closed-form minimum.
double eta(double r, double R);
double eta_min(double R);

// The radius R* where eta_min(R*) = 2/3; below it the lower-bound chain
// 2/3 <= eta <= h <= 1 applies.
double r_star();

struct BoundsReport {
    double min_h = 0.0;
    double max_h = 0.0;
    double min_h_minus_eta = 0.0;   // min over nodes of h - eta
    double min_one_minus_h = 0.0;   // min over nodes of 1 - h
    bool eta_applicable = false;    // R <= R*
    double sqrt_bound = 0.0;        // sqrt(1 - 12/t) for t > 12, else 0
    double min_h_minus_sqrt_bound = 0.0;
    bool ok = false;
};
BoundsReport verify_bounds(const HedgehogProfile& prof, double slack = 1e-9);

// H(x) = sqrt(3/2) h(|x|) (x^ (x) x^ - I/3)
QTensor hedgehog_field(const HedgehogProfile& prof, const Vec3& x);

// Frobenius norm of Delta Q - (bulk gradient) at Q = H, reduced analytically
// to the radial factor; maximum over the sample points.  Checks that the
// solved profile really makes H a critical point of the full energy.
double el_residual(const HedgehogProfile& prof,
                   const std::vector<Vec3>& samples);

// CSV dump with columns r,h,dh,eta,bound_sqrt
void write_profile_csv(const HedgehogProfile& prof, const std::string& path);

}  // namespace hedgehog

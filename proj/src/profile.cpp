#include "hedgehog/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace hedgehog {

double f_of_h(double h, const ScalingParams& p) {
    return 0.5 * p.t * (h * h - 1.0) + 1.5 * p.h_plus * (h * h - h);
}

double df_of_h(double h, const ScalingParams& p) {
    return p.t * h + 1.5 * p.h_plus * (2.0 * h - 1.0);
}

void HedgehogProfile::finish() {
    const std::size_t n = r.size();
    dh.assign(n, 0.0);
    const double dr = r[1] - r[0];
    for (std::size_t i = 1; i + 1 < n; ++i)
        dh[i] = (h[i + 1] - h[i - 1]) / (2.0 * dr);
    dh[0] = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dr);
    dh[n - 1] = (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * dr);
    spline_ = linalg::CubicSpline(r, h);
}

namespace {

// Collocation residual and tridiagonal Jacobian on the interior nodes, in
// the undivided stencil scaling (rows multiplied by dr^2).  The divided form
// has a roundoff floor of eps/dr^2, which would defeat tight tolerances on
// fine grids; this scaling keeps the floor near machine epsilon and leaves
// the Newton step unchanged.
void fill_system(const double* hint, double* res, double* lo, double* di,
                 double* up, const std::vector<double>& r, double dr,
                 const ScalingParams& p) {
    const std::size_t m = r.size() - 2;
    const double dr2 = dr * dr;
    for (std::size_t k = 0; k < m; ++k) {
        const double ri = r[k + 1];
        const double hm = (k == 0) ? 1.0 : hint[k - 1];
        const double hp = (k == m - 1) ? 1.0 : hint[k + 1];
        const double hi = hint[k];
        const double fh = f_of_h(hi, p);
        res[k] = (hp - 2.0 * hi + hm) + (dr / ri) * (hp - hm) -
                 dr2 * (6.0 / (ri * ri)) * hi - dr2 * hi * fh;
        di[k] = -2.0 - dr2 * (6.0 / (ri * ri)) -
                dr2 * (fh + hi * df_of_h(hi, p));
        if (k + 1 < m) up[k] = 1.0 + dr / ri;
        if (k > 0) lo[k - 1] = 1.0 - dr / ri;
    }
}

}  // namespace

HedgehogProfile solve_profile(double R, const ScalingParams& p, std::size_t n,
                              double tol) {
    if (!(R > 1.0)) throw std::invalid_argument("solve_profile: need R > 1");
    if (n < 5) throw std::invalid_argument("solve_profile: need n >= 5");

    HedgehogProfile prof;
    prof.R = R;
    prof.params = p;
    prof.r.resize(n);
    const double dr = (R - 1.0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        prof.r[i] = 1.0 + dr * static_cast<double>(i);

    const std::size_t m = n - 2;
    std::vector<double> u(m, 1.0);  // start from the boundary state h = 1
    std::vector<double> u_good = u;

    // continuation in t: the equation stiffens as t grows
    double t_done = 0.0;
    double step = 5.0;
    for (;;) {
        const double t_next = std::min(p.t, t_done + step);
        const bool final_stage = t_next == p.t;
        const ScalingParams stage = ScalingParams::from_t(t_next);
        // The final stage polishes to the roundoff floor (tol 0 makes Newton
        // run until no step decreases the residual): leftover nodal noise
        // gets amplified by 1/dr^2 when second derivatives are interpolated
        // later, so merely meeting tol is not good enough.
        auto rep = linalg::newton_tridiag(
            m,
            [&](const double* hh, double* res, double* lo, double* di,
                double* up) {
                fill_system(hh, res, lo, di, up, prof.r, dr, stage);
            },
            u.data(), final_stage ? 0.0 : std::max(tol, 1e-10));
        if (final_stage) rep.converged = rep.residual <= tol;
        if (rep.converged) {
            if (final_stage) {
                prof.residual = rep.residual;
                break;
            }
            t_done = t_next;
            u_good = u;
        } else {
            step *= 0.5;
            u = u_good;
            if (step < 0.5) {
                std::vector<double> full(n, 1.0);
                std::copy(u.begin(), u.end(), full.begin() + 1);
                throw SolveError("solve_profile: Newton stalled at t = " +
                                     std::to_string(t_next),
                                 std::move(full), rep.residual);
            }
        }
    }

    prof.h.assign(n, 1.0);
    std::copy(u.begin(), u.end(), prof.h.begin() + 1);
    prof.finish();
    return prof;
}

double profile_energy(const HedgehogProfile& prof) {
    const std::size_t n = prof.r.size();
    const double hp = prof.params.h_plus;
    const double t = prof.params.t;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = prof.r[i];
        const double h = prof.h[i];
        const double d = prof.dh[i];
        const double omh2 = 1.0 - h * h;
        const double integrand =
            r * r * (0.5 * d * d + (t / 8.0) * omh2 * omh2 +
                     (hp / 8.0) * (1.0 + 3.0 * h * h * h * h -
                                   4.0 * h * h * h)) +
            3.0 * h * h;
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        sum += w * integrand;
    }
    return sum * (prof.r[1] - prof.r[0]);
}

double eta(double r, double R) {
    const double R2 = R * R, R3 = R2 * R, R5 = R3 * R2;
    return ((R3 - 1.0) * r * r + (R2 - 1.0) * R3 / (r * r * r)) / (R5 - 1.0);
}

double eta_min(double R) {
    const double R2 = R * R, R3 = R2 * R, R5 = R3 * R2;
    // minimum of A r^2 + B r^-3 is (5/3) A^(3/5) (3B/2)^(2/5)
    const double A = (R3 - 1.0) / (R5 - 1.0);
    const double B = (R2 - 1.0) * R3 / (R5 - 1.0);
    return (5.0 / 3.0) * std::pow(A, 0.6) * std::pow(1.5 * B, 0.4);
}

double r_star() {
    // eta_min is strictly decreasing; solve eta_min(R) = 2/3
    double lo = 1.0 + 1e-9, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eta_min(mid) > 2.0 / 3.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

BoundsReport verify_bounds(const HedgehogProfile& prof, double slack) {
    BoundsReport rep;
    const std::size_t n = prof.r.size();
    rep.min_h = rep.max_h = prof.h[0];
    rep.min_h_minus_eta = 1e300;
    rep.min_one_minus_h = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = prof.h[i];
        rep.min_h = std::min(rep.min_h, h);
        rep.max_h = std::max(rep.max_h, h);
        rep.min_one_minus_h = std::min(rep.min_one_minus_h, 1.0 - h);
        rep.min_h_minus_eta =
            std::min(rep.min_h_minus_eta, h - eta(prof.r[i], prof.R));
    }
    rep.eta_applicable = prof.R <= r_star();
    const double t = prof.params.t;
    if (t > 12.0) {
        rep.sqrt_bound = std::sqrt(1.0 - 12.0 / t);
        rep.min_h_minus_sqrt_bound = rep.min_h - rep.sqrt_bound;
    }
    rep.ok = rep.min_h > 0.0 && rep.min_one_minus_h >= -slack;
    if (rep.eta_applicable)
        rep.ok = rep.ok && rep.min_h_minus_eta >= -slack &&
                 rep.min_h >= 2.0 / 3.0 - slack;
    if (t > 12.0) rep.ok = rep.ok && rep.min_h_minus_sqrt_bound >= -slack;
    return rep;
}

QTensor hedgehog_field(const HedgehogProfile& prof, const Vec3& x) {
    const double r = x.norm();
    if (r < 1.0 - 1e-9 || r > prof.R + 1e-9)
        throw std::invalid_argument("hedgehog_field: point outside the shell");
    const double rc = std::clamp(r, 1.0, prof.R);
    return uniaxial(std::sqrt(1.5) * prof.h_at(rc), x * (1.0 / r));
}

double el_residual(const HedgehogProfile& prof,
                   const std::vector<Vec3>& samples) {
    double worst = 0.0;
    for (const Vec3& x : samples) {
        const double r = x.norm();
        if (r < 1.0 - 1e-9 || r > prof.R + 1e-9)
            throw std::invalid_argument("el_residual: point outside the shell");
        const double rc = std::clamp(r, 1.0, prof.R);
        const double lap = prof.d2h_at(rc) + 2.0 * prof.dh_at(rc) / rc -
                           6.0 * prof.h_at(rc) / (rc * rc);
        // Delta H = sqrt(3/2) (h'' + 2h'/r - 6h/r^2) (x^ x^ - I/3)
        const QTensor lhs = uniaxial(std::sqrt(1.5) * lap, x * (1.0 / r));
        const QTensor q = hedgehog_field(prof, x);
        const auto g = bulk_gradient(q, prof.params);
        QTensor rhs;
        rhs.c = g;
        worst = std::max(worst, std::sqrt((lhs - rhs).norm2()));
    }
    return worst;
}

void write_profile_csv(const HedgehogProfile& prof, const std::string& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(
        std::fopen(path.c_str(), "w"), &std::fclose);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f.get(), "r,h,dh,eta,bound_sqrt\n");
    const double t = prof.params.t;
    const double bound = t > 12.0 ? std::sqrt(1.0 - 12.0 / t) : 0.0;
    for (std::size_t i = 0; i < prof.r.size(); ++i)
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g\n", prof.r[i],
                     prof.h[i], prof.dh[i], eta(prof.r[i], prof.R), bound);
}

}  // namespace hedgehog

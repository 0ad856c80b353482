#include "hedgehog/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "hedgehog/linalg.hpp"
#include "hedgehog/rng.hpp"

namespace hedgehog {
namespace {

// Uniform grid with both endpoints, matching the stencils used throughout.
struct Grid1 {
    double dr;
    std::vector<double> r;
};
Grid1 grid1(double R, std::size_t N) {
    Grid1 g;
    g.dr = (R - 1.0) / static_cast<double>(N - 1);
    g.r.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        g.r[i] = 1.0 + g.dr * static_cast<double>(i);
    g.r[N - 1] = R;
    return g;
}

double richardson2(double coarse, double fine) {
    return fine + (fine - coarse) / 3.0;
}

// Gradient coefficients per component of the mode form; the per-node
// potential block is assembled separately.
struct ModeLayout {
    int ncomp;            // 1 (v0), 2 (v0,v2) or 3 (v0,v2,v4)
    double grad[3];       // coefficient of |v_c'|^2
    double lam;
};
ModeLayout mode_layout(int i) {
    if (i < 0) throw std::invalid_argument("mode index must be nonnegative");
    ModeLayout lay{};
    lay.lam = static_cast<double>(i) * (i + 1);
    if (i == 0) {
        lay.ncomp = 1;
        lay.grad[0] = 2.0 / 3.0;
    } else if (i == 1) {
        lay.ncomp = 2;
        lay.grad[0] = lay.lam / 3.0;
        lay.grad[1] = 1.0;
    } else {
        lay.ncomp = 3;
        lay.grad[0] = lay.lam / 3.0;
        lay.grad[1] = 1.0;
        lay.grad[2] = lay.lam - 2.0;
    }
    return lay;
}

// Per-node 3x3 potential block of the mode form at radius r (entries are
// the matrix of the quadratic form, so cross terms carry half the displayed
// coefficient).  Only the leading ncomp x ncomp corner is used.
void mode_potential(const ModeLayout& lay, double r, const ModeCoefficients& c,
                    double (&out)[3][3]) {
    const double lam = lay.lam;
    const double r2 = r * r;
    for (auto& row : out)
        for (double& v : row) v = 0.0;
    if (lay.ncomp == 1) {
        out[0][0] = (2.0 / 3.0) * (6.0 + r2 * c.f0);
        return;
    }
    out[0][0] = lam * (lam + 6.0) / 3.0 + r2 * (lam / 3.0) * c.f0;
    out[1][1] = lam + 4.0 + r2 * c.f2;
    out[0][1] = out[1][0] = -2.0 * lam;
    if (lay.ncomp == 3) {
        out[2][2] = (lam - 2.0) * (lam - 2.0) + r2 * (lam - 2.0) * c.f4;
        out[1][2] = out[2][1] = 2.0 * (lam - 2.0);
    }
}

double lobpcg_from_seed(const ShellModel& model, int maxit) {
    std::vector<double> x(model.state_size());
    Rng rng(8675309);
    for (double& v : x) v = rng.gaussian();
    linalg::LobpcgOptions opts;
    opts.maxit = maxit;
    const auto res = linalg::lobpcg_smallest(
        [&](const double* in, double* out) {
            std::vector<double> d(in, in + model.state_size());
            std::vector<double> hd;
            model.hessian_apply(d, hd);
            std::copy(hd.begin(), hd.end(), out);
        },
        model.mass_diag(), model.precond_diag(), x, opts);
    if (!res.converged)
        throw std::runtime_error(
            "second-variation eigensolver did not converge");
    return res.lambda;
}

std::unique_ptr<std::FILE, int (*)(std::FILE*)> open_write(
    const std::string& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(
        std::fopen(path.c_str(), "w"), &std::fclose);
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

}  // namespace

ModeCoefficients coefficient_functions(double h, const ScalingParams& p) {
    const double t = p.t;
    const double hp = p.h_plus;
    const double h2 = h * h;
    ModeCoefficients c;
    c.f0 = 0.5 * t * (3.0 * h2 - 1.0) + 1.5 * hp * (3.0 * h2 - 2.0 * h);
    c.f2 = f_of_h(h, p);
    c.f4 = 0.5 * t * (h2 - 1.0) + 1.5 * hp * (h2 + 2.0 * h);
    return c;
}

double second_variation(const ShellModel& model, const QField& V) {
    return model.second_variation_form(V);
}

double hardy_eigen(double R, int k, std::size_t N) {
    if (!(R > 1.0)) throw std::invalid_argument("hardy_eigen: R must exceed 1");
    if (k < 1) throw std::invalid_argument("hardy_eigen: k must be positive");
    if (N < 3) throw std::invalid_argument("hardy_eigen: N too small");
    const Grid1 g = grid1(R, N);
    const std::size_t m = N - 2;
    std::vector<double> d(m), e(m > 0 ? m - 1 : 0);
    const double inv = 1.0 / (g.dr * g.dr);
    for (std::size_t q = 0; q < m; ++q) {
        const std::size_t i = q + 1;
        const double rfl = 0.5 * (g.r[i - 1] + g.r[i]);
        const double rfr = 0.5 * (g.r[i] + g.r[i + 1]);
        d[q] = (rfl * rfl + rfr * rfr) * inv;
        if (q + 1 < m) e[q] = -rfr * rfr * inv;
    }
    return linalg::tridiag_eig_k(d, e, k - 1);
}

double hardy_lambda1(double R) {
    return richardson2(hardy_eigen(R, 1, 4097), hardy_eigen(R, 1, 8193));
}

double hardy_closed_form(double R, int k) {
    const double lr = std::log(R);
    return static_cast<double>(k) * k * std::numbers::pi * std::numbers::pi /
               (lr * lr) +
           0.25;
}

double hardy_printed_form(double R, int k) {
    const double lr = std::log(R);
    return static_cast<double>(k) * k * std::numbers::pi * std::numbers::pi /
               lr +
           0.25;
}

HardyReport hardy_report(double R) {
    HardyReport rep;
    rep.R = R;
    rep.numeric = hardy_lambda1(R);
    rep.corrected = hardy_closed_form(R, 1);
    rep.printed = hardy_printed_form(R, 1);
    rep.rel_err_corrected =
        std::fabs(rep.numeric - rep.corrected) / rep.corrected;
    rep.rel_err_printed = std::fabs(rep.numeric - rep.printed) / rep.printed;
    rep.matches_corrected = rep.rel_err_corrected < 1e-6;
    rep.matches_printed = rep.rel_err_printed < 1e-6;
    return rep;
}

double wirtinger_const(double R) {
    if (!(R > 1.0))
        throw std::invalid_argument("wirtinger_const: R must exceed 1");
    const double w = R - 1.0;
    return std::numbers::pi * std::numbers::pi / (w * w);
}

double wirtinger_eigen(double R, std::size_t N) {
    if (!(R > 1.0) || N < 3)
        throw std::invalid_argument("wirtinger_eigen: bad arguments");
    const double dr = (R - 1.0) / static_cast<double>(N - 1);
    const std::size_t m = N - 2;
    const double inv = 1.0 / (dr * dr);
    std::vector<double> d(m, 2.0 * inv), e(m > 0 ? m - 1 : 0, -inv);
    return linalg::tridiag_eig_k(d, e, 0);
}

std::pair<double, double> hardy_transform_check(double alpha, double beta,
                                                double gamma,
                                                const std::vector<double>& v,
                                                const HedgehogProfile& prof) {
    const std::size_t n = prof.r.size();
    if (v.size() != n)
        throw std::invalid_argument(
            "hardy_transform_check: v must live on the profile grid");
    const double dr = prof.r[1] - prof.r[0];

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double rf = 0.5 * (prof.r[i] + prof.r[i + 1]);
        const double dv = v[i + 1] - v[i];
        lhs += alpha * rf * rf * dv * dv / dr;
        const double hf = 0.5 * (prof.h[i] + prof.h[i + 1]);
        const double dw = v[i + 1] / prof.h[i + 1] - v[i] / prof.h[i];
        rhs += alpha * rf * rf * hf * hf * dw * dw / dr;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double w = rho * dr;
        const double r2 = prof.r[i] * prof.r[i];
        const double fh = f_of_h(prof.h[i], prof.params);
        const double v2 = v[i] * v[i];
        lhs += w * (beta * v2 + alpha * (fh + gamma) * v2 * r2);
        rhs += w * ((beta - 6.0 * alpha) * v2 + alpha * gamma * v2 * r2);
    }
    return {lhs, rhs};
}

double phi_mode(int i, const HedgehogProfile& prof, const ModeFunctions& mf) {
    const std::size_t n = mf.r.size();
    if (n < 3) throw std::invalid_argument("phi_mode: grid too small");
    if (mf.v0.size() != n || mf.v2.size() != n || mf.v4.size() != n)
        throw std::invalid_argument("phi_mode: component size mismatch");
    const ModeLayout lay = mode_layout(i);
    const double dr = mf.r[1] - mf.r[0];
    const std::vector<double>* comp[3] = {&mf.v0, &mf.v2, &mf.v4};

    double acc = 0.0;
    for (std::size_t q = 0; q + 1 < n; ++q) {
        const double rf = 0.5 * (mf.r[q] + mf.r[q + 1]);
        for (int c = 0; c < lay.ncomp; ++c) {
            const double dv = (*comp[c])[q + 1] - (*comp[c])[q];
            acc += lay.grad[c] * rf * rf * dv * dv / dr;
        }
    }
    double pot[3][3];
    for (std::size_t q = 1; q + 1 < n; ++q) {
        const ModeCoefficients cf =
            coefficient_functions(prof.h_at(mf.r[q]), prof.params);
        mode_potential(lay, mf.r[q], cf, pot);
        double vals[3] = {mf.v0[q], mf.v2[q], mf.v4[q]};
        for (int a = 0; a < lay.ncomp; ++a)
            for (int b = 0; b < lay.ncomp; ++b)
                acc += dr * pot[a][b] * vals[a] * vals[b];
    }
    return acc;
}

double phi_mode_min_eig(int i, const HedgehogProfile& prof, std::size_t N) {
    if (N < 5) throw std::invalid_argument("phi_mode_min_eig: N too small");
    const ModeLayout lay = mode_layout(i);
    const Grid1 g = grid1(prof.R, N);
    const std::size_t m = N - 2;
    const int nc = lay.ncomp;
    const std::size_t n = m * static_cast<std::size_t>(nc);
    const int hbw = nc;
    std::vector<double> band((hbw + 1) * n, 0.0);
    std::vector<double> mass(n);

    const auto at = [&](std::size_t row, std::size_t col) -> double& {
        // lower banded storage, band[j*n + i] holds A(i+j, i)
        return band[(row - col) * n + col];
    };

    double pot[3][3];
    for (std::size_t q = 0; q < m; ++q) {
        const std::size_t i0 = q + 1;
        const double rfl = 0.5 * (g.r[i0 - 1] + g.r[i0]);
        const double rfr = 0.5 * (g.r[i0] + g.r[i0 + 1]);
        const ModeCoefficients cf =
            coefficient_functions(prof.h_at(g.r[i0]), prof.params);
        mode_potential(lay, g.r[i0], cf, pot);
        for (int c = 0; c < nc; ++c) {
            const std::size_t p = q * nc + static_cast<std::size_t>(c);
            at(p, p) += lay.grad[c] * (rfl * rfl + rfr * rfr) / g.dr;
            if (q + 1 < m) {
                const std::size_t pn = (q + 1) * nc + static_cast<std::size_t>(c);
                at(pn, p) += -lay.grad[c] * rfr * rfr / g.dr;
            }
            for (int c2 = c; c2 < nc; ++c2) {
                const std::size_t p2 = q * nc + static_cast<std::size_t>(c2);
                at(p2, p) += g.dr * pot[c2][c];
            }
            mass[p] = g.dr * g.r[i0] * g.r[i0];
        }
    }

    // fold the diagonal mass into the operator
    for (std::size_t col = 0; col < n; ++col)
        for (int j = 0; j <= hbw; ++j) {
            const std::size_t row = col + static_cast<std::size_t>(j);
            if (row >= n) break;
            band[static_cast<std::size_t>(j) * n + col] /=
                std::sqrt(mass[row] * mass[col]);
        }
    return linalg::banded_eig_k(n, hbw, band, 0);
}

double full_dsq_min_eig(const ShellModel& model, int maxit) {
    return lobpcg_from_seed(model, maxit);
}

double t_star_estimate(double R, const TStarOptions& opts) {
    if (!(R > 1.0))
        throw std::invalid_argument("t_star_estimate: R must exceed 1");
    const auto stable_at = [&](double t) {
        const ScalingParams p = ScalingParams::from_t(t);
        const HedgehogProfile prof = solve_profile(R, p, opts.mode_nodes);
        for (int i = 0; i <= opts.i_max; ++i)
            if (phi_mode_min_eig(i, prof, opts.mode_nodes) <= 0.0)
                return false;
        if (opts.include_full) {
            const ShellModel model(
                ShellGrid::make(R, opts.full_nr, opts.full_ntheta,
                                opts.full_nphi),
                p);
            if (full_dsq_min_eig(model) <= 0.0) return false;
        }
        return true;
    };

    if (stable_at(0.0)) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (!stable_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > opts.t_hi)
            throw std::runtime_error(
                "t_star_estimate: no stable t found below the bracket cap");
    }
    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        if (stable_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double t_star_estimate(double R, int i_max) {
    TStarOptions opts;
    opts.i_max = i_max;
    return t_star_estimate(R, opts);
}

double improved_bound_gap(const ShellModel& model, const QField& V,
                          double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::domain_error("improved_bound_gap: need 0 < alpha < 1/2");
    if (!(beta > 0.0 && beta < 4.5))
        throw std::domain_error("improved_bound_gap: need 0 < beta < 9/2");
    const auto terms = model.energy_difference_expansion(V);

    const ShellGrid& g = model.grid();
    const std::vector<double>& h = model.radial_profile();
    const ScalingParams& p = model.params();
    const std::size_t na = g.nang();
    double sub = 0.0;
    for (std::size_t i = 1; i + 1 < g.Nr; ++i) {
        const double wr = g.dr * g.r[i] * g.r[i];
        const double h2 = h[i] * h[i];
        for (std::size_t n = 0; n < na; ++n) {
            QTensor vt;
            for (int a = 0; a < 5; ++a) vt.c[a] = V.c[a][i * na + n];
            const auto v = decompose(vt, radial_frame(g.unit[n]));
            const double w = wr * g.wang[n];
            sub += w * ((p.t / 3.0) * h2 * v[0] * v[0] +
                        alpha * p.h_plus * v[0] * v[0] +
                        beta * p.h_plus * (v[3] * v[3] + v[4] * v[4]));
        }
    }
    return terms.quadratic() - sub;
}

StabilityReport stability_report(double R, double t,
                                 const StabilityOptions& opts) {
    StabilityReport rep;
    rep.R = R;
    rep.t = t;
    const ScalingParams p = ScalingParams::from_t(t);
    const HedgehogProfile prof = solve_profile(R, p, opts.mode_nodes);
    rep.mode_eigs.resize(static_cast<std::size_t>(opts.i_max) + 1);
    for (int i = 0; i <= opts.i_max; ++i)
        rep.mode_eigs[static_cast<std::size_t>(i)] =
            phi_mode_min_eig(i, prof, opts.mode_nodes);
    rep.hardy_lambda1 = hardy_lambda1(R);
    rep.hardy_corrected = hardy_closed_form(R, 1);
    rep.hardy_printed = hardy_printed_form(R, 1);
    rep.wirtinger = wirtinger_const(R);
    bool ok = true;
    if (opts.include_full) {
        const ShellModel model(
            ShellGrid::make(R, opts.full_nr, opts.full_ntheta, opts.full_nphi),
            p);
        rep.full_dsq_min = full_dsq_min_eig(model);
        ok = rep.full_dsq_min > opts.margin;
    } else {
        rep.full_dsq_min = std::numeric_limits<double>::quiet_NaN();
    }
    for (double e : rep.mode_eigs) ok = ok && e > opts.margin;
    rep.stable = ok;
    return rep;
}

void write_stability_csv(const std::string& path,
                         const std::vector<StabilityReport>& rows) {
    auto f = open_write(path);
    std::fprintf(f.get(),
                 "R,t,lambda_min_i0,lambda_min_i1,lambda_min_i2,"
                 "hardy_lambda1,full_dsq_min,verdict\n");
    for (const StabilityReport& r : rows) {
        if (r.mode_eigs.size() < 3)
            throw std::invalid_argument(
                "write_stability_csv: need mode eigenvalues through i = 2");
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                     r.R, r.t, r.mode_eigs[0], r.mode_eigs[1], r.mode_eigs[2],
                     r.hardy_lambda1, r.full_dsq_min,
                     r.stable ? "stable" : "unstable");
    }
}

nlohmann::ordered_json stability_json(const std::vector<StabilityReport>& rows,
                                      const StabilityOptions& opts) {
    nlohmann::ordered_json out;
    out["settings"] = {{"i_max", opts.i_max},
                       {"mode_nodes", opts.mode_nodes},
                       {"full_grid",
                        {opts.full_nr, opts.full_ntheta, opts.full_nphi}},
                       {"margin", opts.margin},
                       {"include_full", opts.include_full}};
    out["rows"] = nlohmann::ordered_json::array();
    for (const StabilityReport& r : rows) {
        nlohmann::ordered_json row;
        row["R"] = r.R;
        row["t"] = r.t;
        row["mode_eigs"] = r.mode_eigs;
        row["hardy_lambda1"] = r.hardy_lambda1;
        row["hardy_corrected"] = r.hardy_corrected;
        row["hardy_printed"] = r.hardy_printed;
        row["wirtinger"] = r.wirtinger;
        row["full_dsq_min"] = r.full_dsq_min;
        row["verdict"] = r.stable ? "stable" : "unstable";
        out["rows"].push_back(row);
    }
    return out;
}

void write_stability_json(const std::string& path,
                          const std::vector<StabilityReport>& rows,
                          const StabilityOptions& opts) {
    auto f = open_write(path);
    const std::string text = stability_json(rows, opts).dump(2);
    std::fwrite(text.data(), 1, text.size(), f.get());
    std::fputc('\n', f.get());
}

}  // namespace hedgehog

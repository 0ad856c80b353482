#include "hedgehog/shell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "hedgehog/kernels.hpp"
#include "hedgehog/linalg.hpp"
#include "hedgehog/profile.hpp"
#include "hedgehog/rng.hpp"

namespace hedgehog {
namespace {

const double kRoot6 = std::sqrt(6.0);
const double kRoot32 = std::sqrt(1.5);

// Trapezoid weight of a radial layer.
double rho_of(std::size_t i, std::size_t nr) {
    return (i == 0 || i + 1 == nr) ? 0.5 : 1.0;
}

// Discrete critical point of the radial subspace: stationarity of the
// discretized energy restricted to fields h(r) Q_b, which is
//   rfL^2 (h_i - h_{i-1}) - rfR^2 (h_{i+1} - h_i)
//     + dr^2 (6 h_i + r_i^2 h_i f(h_i)) = 0
// with both ends pinned to 1.  Seeded with the continuum profile and
// polished to the roundoff floor so the hedgehog state is stationary to
// machine precision, not merely to O(dr^2).
std::vector<double> variational_profile(const ShellGrid& g,
                                        const ScalingParams& p) {
    const HedgehogProfile cont = solve_profile(g.R, p, 1025);
    const std::size_t nr = g.Nr;
    std::vector<double> h(nr);
    for (std::size_t i = 0; i < nr; ++i) h[i] = cont.h_at(g.r[i]);
    h[0] = h[nr - 1] = 1.0;

    const std::size_t m = nr - 2;
    const double dr2 = g.dr * g.dr;
    const auto fill = [&](const double* u, double* res, double* lo, double* di,
                          double* up) {
        for (std::size_t q = 0; q < m; ++q) {
            const std::size_t i = q + 1;
            const double hm = q == 0 ? 1.0 : u[q - 1];
            const double hp = q + 1 == m ? 1.0 : u[q + 1];
            const double hi = u[q];
            const double rfl = 0.5 * (g.r[i - 1] + g.r[i]);
            const double rfr = 0.5 * (g.r[i] + g.r[i + 1]);
            const double r2 = g.r[i] * g.r[i];
            const double fh = f_of_h(hi, p);
            res[q] = rfl * rfl * (hi - hm) - rfr * rfr * (hp - hi) +
                     dr2 * (6.0 * hi + r2 * hi * fh);
            di[q] = rfl * rfl + rfr * rfr +
                    dr2 * (6.0 + r2 * (fh + hi * df_of_h(hi, p)));
            if (q > 0) lo[q - 1] = -rfl * rfl;
            if (q + 1 < m) up[q] = -rfr * rfr;
        }
    };
    const auto rep = linalg::newton_tridiag(m, fill, h.data() + 1, 0.0, 80);
    if (!(rep.residual < 1e-8))
        throw SolveError("shell: radial stationarity solve stalled", h,
                         rep.residual);
    return h;
}

}  // namespace

ShellGrid ShellGrid::make(double R, std::size_t Nr, std::size_t Ntheta,
                          std::size_t Nphi) {
    if (!(R > 1.0)) throw std::invalid_argument("ShellGrid: R must exceed 1");
    if (Nr < 3 || Ntheta < 2 || Nphi < 4)
        throw std::invalid_argument("ShellGrid: degenerate node counts");
    ShellGrid g;
    g.R = R;
    g.Nr = Nr;
    g.Ntheta = Ntheta;
    g.Nphi = Nphi;
    g.dr = (R - 1.0) / static_cast<double>(Nr - 1);
    g.r.resize(Nr);
    for (std::size_t i = 0; i < Nr; ++i)
        g.r[i] = 1.0 + g.dr * static_cast<double>(i);
    g.r[Nr - 1] = R;

    linalg::gauss_legendre(static_cast<int>(Ntheta), g.ctheta, g.wtheta);
    g.phi.resize(Nphi);
    for (std::size_t k = 0; k < Nphi; ++k)
        g.phi[k] = 2.0 * std::numbers::pi * static_cast<double>(k) /
                   static_cast<double>(Nphi);

    g.lmax = std::min(Ntheta - 1, (Nphi - 1) / 2);
    g.wang.resize(g.nang());
    g.unit.resize(g.nang());
    const double wphi = 2.0 * std::numbers::pi / static_cast<double>(Nphi);
    for (std::size_t j = 0; j < Ntheta; ++j) {
        const double ct = g.ctheta[j];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (std::size_t k = 0; k < Nphi; ++k) {
            const std::size_t n = j * Nphi + k;
            g.wang[n] = g.wtheta[j] * wphi;
            g.unit[n] = {st * std::cos(g.phi[k]), st * std::sin(g.phi[k]), ct};
        }
    }
    return g;
}

QField make_field(const ShellGrid& g) {
    QField q;
    q.nodes = g.Nr * g.nang();
    for (auto& plane : q.c) plane.assign(q.nodes, 0.0);
    return q;
}

ShellModel::ShellModel(const ShellGrid& g, const ScalingParams& p)
    : g_(g), p_(p) {
    na_ = g_.nang();
    nm_ = g_.nmodes();
    nlayers_ = g_.Nr - 2;

    // Synthesis matrix: real orthonormal spherical harmonics per angular
    // node, modes ordered l = 0..lmax with m = 0 first, then cos/sin pairs.
    synth_.assign(na_ * nm_, 0.0);
    lw_.assign(nm_, 0.0);
    std::vector<double> pbar(
        linalg::legendre_index(static_cast<int>(g_.lmax),
                               static_cast<int>(g_.lmax)) +
        1);
    for (std::size_t j = 0; j < g_.Ntheta; ++j) {
        linalg::legendre_bar(static_cast<int>(g_.lmax), g_.ctheta[j],
                             pbar.data());
        for (std::size_t k = 0; k < g_.Nphi; ++k) {
            double* row = &synth_[(j * g_.Nphi + k) * nm_];
            std::size_t mu = 0;
            for (int l = 0; l <= static_cast<int>(g_.lmax); ++l) {
                row[mu] = pbar[linalg::legendre_index(l, 0)];
                lw_[mu++] = static_cast<double>(l * (l + 1));
                for (int m = 1; m <= l; ++m) {
                    const double pb =
                        std::numbers::sqrt2 * pbar[linalg::legendre_index(l, m)];
                    const double arg = static_cast<double>(m) * g_.phi[k];
                    row[mu] = pb * std::cos(arg);
                    lw_[mu++] = static_cast<double>(l * (l + 1));
                    row[mu] = pb * std::sin(arg);
                    lw_[mu++] = static_cast<double>(l * (l + 1));
                }
            }
        }
    }
    synthT_.assign(nm_ * na_, 0.0);
    for (std::size_t n = 0; n < na_; ++n)
        for (std::size_t mu = 0; mu < nm_; ++mu)
            synthT_[mu * na_ + n] = synth_[n * nm_ + mu];

    // Boundary tensor nodally and spectrally (pure l = 2 content), and the
    // moving frame per angular node.
    bnod_.assign(5 * na_, 0.0);
    frames_.resize(na_);
    for (std::size_t n = 0; n < na_; ++n) {
        const QTensor qb = boundary_tensor(g_.unit[n]);
        for (int a = 0; a < 5; ++a) bnod_[a * na_ + n] = qb.c[a];
        frames_[n] = radial_frame(g_.unit[n]);
    }
    ub_.assign(5 * nm_, 0.0);
    std::vector<double> wtmp(na_);
    for (int a = 0; a < 5; ++a) {
        for (std::size_t n = 0; n < na_; ++n)
            wtmp[n] = g_.wang[n] * bnod_[a * na_ + n];
        kernels::gemv_acc(nm_, na_, synthT_.data(), wtmp.data(),
                          &ub_[static_cast<std::size_t>(a) * nm_]);
    }

    h_ = variational_profile(g_, p_);
    ehedge_ = energy(hedgehog_state());
}

const double* ShellModel::layer_coef(const std::vector<double>& s,
                                     std::size_t i, int a) const {
    if (i == 0 || i + 1 == g_.Nr)
        return &ub_[static_cast<std::size_t>(a) * nm_];
    return &s[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_];
}

void ShellModel::synth_layer(const double* coef, double* nodal) const {
    std::fill(nodal, nodal + na_, 0.0);
    kernels::gemv_acc(na_, nm_, synth_.data(), coef, nodal);
}

std::vector<double> ShellModel::hedgehog_state() const {
    std::vector<double> s(state_size());
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i)
        for (int a = 0; a < 5; ++a) {
            const double* src = &ub_[static_cast<std::size_t>(a) * nm_];
            double* dst = &s[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_];
            for (std::size_t mu = 0; mu < nm_; ++mu) dst[mu] = h_[i] * src[mu];
        }
    return s;
}

QField ShellModel::hedgehog_field() const { return to_field(hedgehog_state()); }

double ShellModel::elastic_energy(const std::vector<double>& s) const {
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < g_.Nr; ++i) {
        const double rf = 0.5 * (g_.r[i] + g_.r[i + 1]);
        const double fac = 0.5 * rf * rf / g_.dr;
        for (int a = 0; a < 5; ++a) {
            const double* lo = layer_coef(s, i, a);
            const double* hi = layer_coef(s, i + 1, a);
            double acc = 0.0;
            for (std::size_t mu = 0; mu < nm_; ++mu) {
                const double d = hi[mu] - lo[mu];
                acc += d * d;
            }
            e += fac * acc;
        }
    }
    for (std::size_t i = 0; i < g_.Nr; ++i) {
        const double fac = 0.5 * rho_of(i, g_.Nr) * g_.dr;
        for (int a = 0; a < 5; ++a) {
            const double* u = layer_coef(s, i, a);
            double acc = 0.0;
            for (std::size_t mu = 0; mu < nm_; ++mu)
                acc += lw_[mu] * u[mu] * u[mu];
            e += fac * acc;
        }
    }
    return e;
}

void ShellModel::elastic_grad_acc(const std::vector<double>& s,
                                  std::vector<double>& grad) const {
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double rfl = 0.5 * (g_.r[i - 1] + g_.r[i]);
        const double rfr = 0.5 * (g_.r[i] + g_.r[i + 1]);
        const double cl = rfl * rfl / g_.dr;
        const double cr = rfr * rfr / g_.dr;
        const double ca = g_.dr;  // interior trapezoid weight is 1
        for (int a = 0; a < 5; ++a) {
            const double* um = layer_coef(s, i - 1, a);
            const double* u = layer_coef(s, i, a);
            const double* up = layer_coef(s, i + 1, a);
            double* gr = &grad[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_];
            for (std::size_t mu = 0; mu < nm_; ++mu)
                gr[mu] += cl * (u[mu] - um[mu]) - cr * (up[mu] - u[mu]) +
                          ca * lw_[mu] * u[mu];
        }
    }
}

double ShellModel::energy(const std::vector<double>& s) const {
    double e = elastic_energy(s);
    std::vector<double> cb(5 * na_);
    const double* planes[5];
    for (std::size_t i = 0; i < g_.Nr; ++i) {
        const double scale = rho_of(i, g_.Nr) * g_.dr * g_.r[i] * g_.r[i];
        if (i == 0 || i + 1 == g_.Nr) {
            for (int a = 0; a < 5; ++a)
                planes[a] = &bnod_[static_cast<std::size_t>(a) * na_];
        } else {
            for (int a = 0; a < 5; ++a) {
                double* dst = &cb[static_cast<std::size_t>(a) * na_];
                synth_layer(layer_coef(s, i, a), dst);
                planes[a] = dst;
            }
        }
        e += kernels::bulk_sum(planes, g_.wang.data(), na_, p_.t, p_.h_plus,
                               scale);
    }
    return e;
}

double ShellModel::energy_grad(const std::vector<double>& s,
                               std::vector<double>& grad) const {
    grad.assign(state_size(), 0.0);
    double e = elastic_energy(s);
    elastic_grad_acc(s, grad);

    std::vector<double> cb(5 * na_), gb(5 * na_);
    const double* planes[5];
    double* gplanes[5];
    for (std::size_t i = 0; i < g_.Nr; ++i) {
        const double scale = rho_of(i, g_.Nr) * g_.dr * g_.r[i] * g_.r[i];
        if (i == 0 || i + 1 == g_.Nr) {
            for (int a = 0; a < 5; ++a)
                planes[a] = &bnod_[static_cast<std::size_t>(a) * na_];
            e += kernels::bulk_sum(planes, g_.wang.data(), na_, p_.t,
                                   p_.h_plus, scale);
            continue;
        }
        for (int a = 0; a < 5; ++a) {
            double* dst = &cb[static_cast<std::size_t>(a) * na_];
            synth_layer(layer_coef(s, i, a), dst);
            planes[a] = dst;
            gplanes[a] = &gb[static_cast<std::size_t>(a) * na_];
        }
        e += kernels::bulk_grad(planes, g_.wang.data(), na_, p_.t, p_.h_plus,
                                scale, gplanes);
        for (int a = 0; a < 5; ++a)
            kernels::gemv_acc(
                nm_, na_, synthT_.data(), gplanes[a],
                &grad[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_]);
    }
    return e;
}

void ShellModel::hessian_apply(const std::vector<double>& d,
                               std::vector<double>& out) const {
    out.assign(state_size(), 0.0);

    // Elastic part, with zero boundary blocks for direction fields.
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double rfl = 0.5 * (g_.r[i - 1] + g_.r[i]);
        const double rfr = 0.5 * (g_.r[i] + g_.r[i + 1]);
        const double cl = rfl * rfl / g_.dr;
        const double cr = rfr * rfr / g_.dr;
        for (int a = 0; a < 5; ++a) {
            const double* um = i == 1 ? nullptr : layer_coef(d, i - 1, a);
            const double* u = layer_coef(d, i, a);
            const double* up = i + 2 == g_.Nr ? nullptr : layer_coef(d, i + 1, a);
            double* gr = &out[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_];
            for (std::size_t mu = 0; mu < nm_; ++mu) {
                const double dm = um ? um[mu] : 0.0;
                const double dp = up ? up[mu] : 0.0;
                gr[mu] += cl * (u[mu] - dm) - cr * (dp - u[mu]) +
                          g_.dr * lw_[mu] * u[mu];
            }
        }
    }

    // Bulk Hessian at the hedgehog state, nodally per layer.
    std::vector<double> hn(5 * na_), db(5 * na_), hb(5 * na_);
    const double* hplanes[5];
    const double* dplanes[5];
    double* oplanes[5];
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double scale = g_.dr * g_.r[i] * g_.r[i];
        for (int a = 0; a < 5; ++a) {
            double* hdst = &hn[static_cast<std::size_t>(a) * na_];
            const double* b = &bnod_[static_cast<std::size_t>(a) * na_];
            for (std::size_t n = 0; n < na_; ++n) hdst[n] = h_[i] * b[n];
            hplanes[a] = hdst;
            double* ddst = &db[static_cast<std::size_t>(a) * na_];
            synth_layer(layer_coef(d, i, a), ddst);
            dplanes[a] = ddst;
            oplanes[a] = &hb[static_cast<std::size_t>(a) * na_];
        }
        kernels::bulk_hess(hplanes, dplanes, g_.wang.data(), na_, p_.t,
                           p_.h_plus, scale, oplanes);
        for (int a = 0; a < 5; ++a)
            kernels::gemv_acc(
                nm_, na_, synthT_.data(), oplanes[a],
                &out[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_]);
    }
}

std::vector<double> ShellModel::mass_diag() const {
    std::vector<double> m(state_size());
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double w = g_.dr * g_.r[i] * g_.r[i];
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t mu = 0; mu < nm_; ++mu)
                m[((i - 1) * 5 + a) * nm_ + mu] = w;
    }
    return m;
}

std::vector<double> ShellModel::precond_diag() const {
    std::vector<double> pd(state_size());
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double rfl = 0.5 * (g_.r[i - 1] + g_.r[i]);
        const double rfr = 0.5 * (g_.r[i] + g_.r[i + 1]);
        const double diag_r = (rfl * rfl + rfr * rfr) / g_.dr;
        const double wm = g_.dr * g_.r[i] * g_.r[i];
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t mu = 0; mu < nm_; ++mu)
                pd[((i - 1) * 5 + a) * nm_ + mu] =
                    1.0 / (diag_r + g_.dr * lw_[mu] +
                           (p_.t + 3.0 * p_.h_plus) * wm);
    }
    return pd;
}

QField ShellModel::to_field(const std::vector<double>& s) const {
    QField q = make_field(g_);
    for (std::size_t i = 0; i < g_.Nr; ++i)
        for (int a = 0; a < 5; ++a) {
            double* dst = &q.c[static_cast<std::size_t>(a)][i * na_];
            if (i == 0 || i + 1 == g_.Nr) {
                const double* b = &bnod_[static_cast<std::size_t>(a) * na_];
                std::copy(b, b + na_, dst);
            } else {
                synth_layer(layer_coef(s, i, a), dst);
            }
        }
    return q;
}

std::vector<double> ShellModel::to_state(const QField& q) const {
    if (q.nodes != g_.Nr * na_)
        throw std::domain_error("to_state: field does not match grid");
    std::vector<double> s(state_size(), 0.0);
    std::vector<double> wtmp(na_);
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i)
        for (int a = 0; a < 5; ++a) {
            const double* src = &q.c[static_cast<std::size_t>(a)][i * na_];
            for (std::size_t n = 0; n < na_; ++n)
                wtmp[n] = g_.wang[n] * src[n];
            kernels::gemv_acc(
                nm_, na_, synthT_.data(), wtmp.data(),
                &s[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_]);
        }
    return s;
}

double ShellModel::field_energy(const QField& q) const {
    return energy(to_state(q));
}

QField ShellModel::field_gradient(const QField& q) const {
    std::vector<double> gs;
    energy_grad(to_state(q), gs);
    QField g = make_field(g_);
    std::vector<double> tmp(na_);
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i)
        for (int a = 0; a < 5; ++a) {
            synth_layer(&gs[((i - 1) * 5 + static_cast<std::size_t>(a)) * nm_],
                        tmp.data());
            double* dst = &g.c[static_cast<std::size_t>(a)][i * na_];
            for (std::size_t n = 0; n < na_; ++n)
                dst[n] = g_.wang[n] * tmp[n];
        }
    return g;
}

ShellModel::ExpansionTerms ShellModel::energy_difference_expansion(
    const QField& V) const {
    if (V.nodes != g_.Nr * na_)
        throw std::domain_error("expansion: field does not match grid");
    for (int a = 0; a < 5; ++a)
        for (std::size_t n = 0; n < na_; ++n)
            if (V.c[static_cast<std::size_t>(a)][n] != 0.0 ||
                V.c[static_cast<std::size_t>(a)][(g_.Nr - 1) * na_ + n] != 0.0)
                throw std::domain_error(
                    "expansion: V must vanish on both boundary spheres");

    ExpansionTerms out;

    // Elastic term through the per-layer analysis, boundary blocks zero.
    std::vector<double> vs((g_.Nr) * 5 * nm_, 0.0);
    std::vector<double> wtmp(na_);
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i)
        for (int a = 0; a < 5; ++a) {
            const double* src = &V.c[static_cast<std::size_t>(a)][i * na_];
            for (std::size_t n = 0; n < na_; ++n)
                wtmp[n] = g_.wang[n] * src[n];
            kernels::gemv_acc(nm_, na_, synthT_.data(), wtmp.data(),
                              &vs[(i * 5 + static_cast<std::size_t>(a)) * nm_]);
        }
    for (std::size_t i = 0; i + 1 < g_.Nr; ++i) {
        const double rf = 0.5 * (g_.r[i] + g_.r[i + 1]);
        const double fac = 0.5 * rf * rf / g_.dr;
        for (std::size_t a = 0; a < 5; ++a) {
            const double* lo = &vs[(i * 5 + a) * nm_];
            const double* hi = &vs[((i + 1) * 5 + a) * nm_];
            double acc = 0.0;
            for (std::size_t mu = 0; mu < nm_; ++mu) {
                const double dd = hi[mu] - lo[mu];
                acc += dd * dd;
            }
            out.elastic += fac * acc;
        }
    }
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double fac = 0.5 * g_.dr;
        for (std::size_t a = 0; a < 5; ++a) {
            const double* u = &vs[(i * 5 + a) * nm_];
            double acc = 0.0;
            for (std::size_t mu = 0; mu < nm_; ++mu)
                acc += lw_[mu] * u[mu] * u[mu];
            out.elastic += fac * acc;
        }
    }

    // Pointwise terms in the moving frame.
    const double t = p_.t;
    const double hp = p_.h_plus;
    double cub1 = 0.0, cub2 = 0.0, quart = 0.0;
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double wr = g_.dr * g_.r[i] * g_.r[i];
        const double h = h_[i];
        const double h2 = h * h;
        for (std::size_t n = 0; n < na_; ++n) {
            QTensor vt;
            for (int a = 0; a < 5; ++a)
                vt.c[static_cast<std::size_t>(a)] =
                    V.c[static_cast<std::size_t>(a)][i * na_ + n];
            const auto v = decompose(vt, frames_[n]);
            const double w = wr * g_.wang[n];
            const double s12 = v[1] * v[1] + v[2] * v[2];
            const double s34 = v[3] * v[3] + v[4] * v[4];
            const double n2 = (2.0 / 3.0) * v[0] * v[0] + 2.0 * (s12 + s34);
            out.quadratic_bulk +=
                w * (0.25 * t * n2 * (h2 - 1.0) + (t / 3.0) * h2 * v[0] * v[0] +
                     0.5 * hp * v[0] * v[0] * (3.0 * h2 - 2.0 * h) +
                     1.5 * hp * (h2 + 2.0 * h) * s34 +
                     1.5 * hp * (h2 - h) * s12);
            cub1 += w * h * v[0] * n2;
            const double tr3 = (2.0 / 9.0) * v[0] * v[0] * v[0] +
                               v[0] * s12 + 6.0 * v[1] * v[2] * v[3] +
                               3.0 * v[4] * (v[1] * v[1] - v[2] * v[2]) -
                               2.0 * v[0] * s34;
            cub2 += w * tr3;
            quart += w * n2 * n2;
        }
    }
    out.cubic = (t / kRoot6 + kRoot32 * hp) * cub1 - 0.5 * kRoot6 * hp * cub2;
    out.quartic = 0.125 * (t + 3.0 * hp) * quart;
    return out;
}

double ShellModel::second_variation_form(const QField& V) const {
    const ExpansionTerms terms = energy_difference_expansion(V);
    // Recompute the pointwise quadratic form from its own display rather
    // than doubling quadratic_bulk, so the two styles cross-check.
    const double t = p_.t;
    const double hp = p_.h_plus;
    double quad = 0.0;
    for (std::size_t i = 1; i + 1 < g_.Nr; ++i) {
        const double wr = g_.dr * g_.r[i] * g_.r[i];
        const double h = h_[i];
        const double h2 = h * h;
        for (std::size_t n = 0; n < na_; ++n) {
            QTensor vt;
            for (int a = 0; a < 5; ++a)
                vt.c[static_cast<std::size_t>(a)] =
                    V.c[static_cast<std::size_t>(a)][i * na_ + n];
            const auto v = decompose(vt, frames_[n]);
            const double w = wr * g_.wang[n];
            const double s12 = v[1] * v[1] + v[2] * v[2];
            const double s34 = v[3] * v[3] + v[4] * v[4];
            const double n2 = (2.0 / 3.0) * v[0] * v[0] + 2.0 * (s12 + s34);
            quad += w * (0.5 * t * n2 * (h2 - 1.0) +
                         (2.0 * t / 3.0) * h2 * v[0] * v[0] +
                         hp * v[0] * v[0] * (3.0 * h2 - 2.0 * h) +
                         3.0 * hp * (h2 + 2.0 * h) * s34 +
                         3.0 * hp * (h2 - h) * s12);
        }
    }
    return 2.0 * terms.elastic + quad;
}

MinResult ShellModel::minimize(const std::vector<double>& init,
                               const MinimizeOptions& opts) const {
    const std::size_t n = state_size();
    if (init.size() != n)
        throw std::domain_error("minimize: state size mismatch");
    const std::vector<double> pd = precond_diag();

    std::vector<double> x = init, g(n), gnew(n), dir(n), xtrial(n);
    double e = energy_grad(x, g);

    std::vector<std::vector<double>> ss, yy;
    std::vector<double> rr;
    const int mem = opts.gradient_flow ? 0 : std::max(0, opts.memory);

    MinResult res;
    int iter = 0;
    for (; iter < opts.maxit; ++iter) {
        const double gnorm = std::sqrt(kernels::dot(g.data(), g.data(), n));
        if (gnorm <= opts.tol) break;

        // Two-loop recursion with the diagonal preconditioner as H0.
        dir = g;
        std::vector<double> alpha(ss.size());
        for (std::size_t idx = ss.size(); idx-- > 0;) {
            alpha[idx] = rr[idx] *
                         kernels::dot(ss[idx].data(), dir.data(), n);
            kernels::axpy(-alpha[idx], yy[idx].data(), dir.data(), n);
        }
        for (std::size_t q = 0; q < n; ++q) dir[q] *= pd[q];
        for (std::size_t idx = 0; idx < ss.size(); ++idx) {
            const double beta =
                rr[idx] * kernels::dot(yy[idx].data(), dir.data(), n);
            kernels::axpy(alpha[idx] - beta, ss[idx].data(), dir.data(), n);
        }
        for (std::size_t q = 0; q < n; ++q) dir[q] = -dir[q];

        double slope = kernels::dot(dir.data(), g.data(), n);
        if (!(slope < 0.0)) {
            // History went bad; fall back to preconditioned steepest descent.
            ss.clear();
            yy.clear();
            rr.clear();
            for (std::size_t q = 0; q < n; ++q) dir[q] = -pd[q] * g[q];
            slope = kernels::dot(dir.data(), g.data(), n);
        }

        double step = 1.0;
        double etrial = 0.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            xtrial = x;
            kernels::axpy(step, dir.data(), xtrial.data(), n);
            etrial = energy(xtrial);
            if (etrial <= e + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const double enew = energy_grad(xtrial, gnew);
        if (mem > 0) {
            std::vector<double> sv(n), yv(n);
            for (std::size_t q = 0; q < n; ++q) {
                sv[q] = xtrial[q] - x[q];
                yv[q] = gnew[q] - g[q];
            }
            const double sy = kernels::dot(sv.data(), yv.data(), n);
            const double sn = std::sqrt(kernels::dot(sv.data(), sv.data(), n));
            const double yn = std::sqrt(kernels::dot(yv.data(), yv.data(), n));
            if (sy > 1e-12 * sn * yn) {
                ss.push_back(std::move(sv));
                yy.push_back(std::move(yv));
                rr.push_back(1.0 / sy);
                if (ss.size() > static_cast<std::size_t>(mem)) {
                    ss.erase(ss.begin());
                    yy.erase(yy.begin());
                    rr.erase(rr.begin());
                }
            }
        }
        x.swap(xtrial);
        g.swap(gnew);
        e = enew;
    }

    res.energy = e;
    res.gap = e - ehedge_;
    res.grad_norm = std::sqrt(kernels::dot(g.data(), g.data(), n));
    res.iterations = iter;
    res.converged = res.grad_norm <= opts.tol;

    const std::vector<double> hs = hedgehog_state();
    const std::vector<double> md = mass_diag();
    double d2 = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        const double dq = x[q] - hs[q];
        d2 += md[q] * dq * dq;
    }
    res.distance = std::sqrt(d2);
    return res;
}

MinResult ShellModel::minimize(const QField& init,
                               const MinimizeOptions& opts) const {
    return minimize(to_state(init), opts);
}

QField random_admissible(const ShellModel& m, double amplitude,
                         std::uint64_t seed) {
    if (!(amplitude >= 0.0))
        throw std::invalid_argument("random_admissible: amplitude < 0");
    const ShellGrid& g = m.grid();
    std::vector<double> s = m.hedgehog_state();
    if (amplitude == 0.0) return m.to_field(s);

    // Smooth band-limited bump: low-order harmonics times half-period sine
    // radial shapes, so the perturbation vanishes at both boundaries and
    // stays resolved under refinement.  All draws happen before the layer
    // loop, so the field depends only on the seed.
    const std::size_t lcap = std::min<std::size_t>(6, g.lmax);
    const int kmax = 3;
    const std::size_t nm = g.nmodes();
    const std::size_t nmc = (lcap + 1) * (lcap + 1);
    Rng rng(seed);
    std::vector<double> draw(static_cast<std::size_t>(kmax) * 5 * nmc);
    {
        std::size_t idx = 0;
        for (int k = 1; k <= kmax; ++k)
            for (int a = 0; a < 5; ++a)
                for (std::size_t l = 0; l <= lcap; ++l) {
                    const double damp =
                        1.0 / ((1.0 + static_cast<double>(l * (l + 1))) *
                               static_cast<double>(k));
                    const std::size_t reps = l == 0 ? 1 : 2 * l + 1;
                    for (std::size_t rep = 0; rep < reps; ++rep)
                        draw[idx++] = damp * rng.gaussian();
                }
    }

    std::vector<double> pert(s.size(), 0.0);
    for (std::size_t i = 1; i + 1 < g.Nr; ++i) {
        const double xi = (g.r[i] - 1.0) / (g.R - 1.0);
        for (int k = 1; k <= kmax; ++k) {
            const double shape = std::sin(std::numbers::pi * k * xi);
            for (std::size_t a = 0; a < 5; ++a) {
                const double* dr =
                    &draw[((static_cast<std::size_t>(k - 1) * 5) + a) * nmc];
                double* dst = &pert[((i - 1) * 5 + a) * nm];
                for (std::size_t mu = 0; mu < nmc; ++mu)
                    dst[mu] += shape * dr[mu];
            }
        }
    }

    // Normalize: the largest nodal Frobenius norm of the perturbation
    // becomes exactly `amplitude`.
    QField pf = m.to_field(pert);
    double maxf = 0.0;
    const std::size_t na = g.nang();
    for (std::size_t i = 1; i + 1 < g.Nr; ++i)
        for (std::size_t n = 0; n < na; ++n) {
            double f2 = 0.0;
            for (int a = 0; a < 5; ++a) {
                const double c = pf.c[static_cast<std::size_t>(a)][i * na + n];
                f2 += c * c;
            }
            maxf = std::max(maxf, std::sqrt(f2));
        }
    const double scl = maxf > 0.0 ? amplitude / maxf : 0.0;
    for (std::size_t q = 0; q < s.size(); ++q) s[q] += scl * pert[q];
    return m.to_field(s);
}

double field_distance(const QField& a, const QField& b, const ShellGrid& g) {
    const std::size_t nodes = g.Nr * g.nang();
    if (a.nodes != nodes || b.nodes != nodes)
        throw std::domain_error("field_distance: grid mismatch");
    double acc = 0.0;
    const std::size_t na = g.nang();
    for (std::size_t i = 0; i < g.Nr; ++i) {
        const double wr = rho_of(i, g.Nr) * g.dr * g.r[i] * g.r[i];
        for (std::size_t n = 0; n < na; ++n) {
            double f2 = 0.0;
            for (int pl = 0; pl < 5; ++pl) {
                const double d =
                    a.c[static_cast<std::size_t>(pl)][i * na + n] -
                    b.c[static_cast<std::size_t>(pl)][i * na + n];
                f2 += d * d;
            }
            acc += wr * g.wang[n] * f2;
        }
    }
    return std::sqrt(acc);
}

void write_field_csv(const std::string& path, const ShellGrid& g,
                     const QField& q) {
    if (q.nodes != g.Nr * g.nang())
        throw std::domain_error("write_field_csv: grid mismatch");
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(
        std::fopen(path.c_str(), "w"), &std::fclose);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f.get(), "r,theta,phi,c0,c1,c2,c3,c4\n");
    const std::size_t na = g.nang();
    for (std::size_t i = 0; i < g.Nr; ++i)
        for (std::size_t j = 0; j < g.Ntheta; ++j)
            for (std::size_t k = 0; k < g.Nphi; ++k) {
                const std::size_t n = i * na + j * g.Nphi + k;
                std::fprintf(f.get(),
                             "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                             g.r[i], std::acos(g.ctheta[j]), g.phi[k],
                             q.c[0][n], q.c[1][n], q.c[2][n], q.c[3][n],
                             q.c[4][n]);
            }
}

void write_field_sidecar(const std::string& path, const ShellGrid& g,
                         const ScalingParams& p, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["R"] = g.R;
    j["Nr"] = g.Nr;
    j["Ntheta"] = g.Ntheta;
    j["Nphi"] = g.Nphi;
    j["lmax"] = g.lmax;
    j["t"] = p.t;
    j["h_plus"] = p.h_plus;
    j["seed"] = seed;
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(
        std::fopen(path.c_str(), "w"), &std::fclose);
    if (!f) throw std::runtime_error("cannot open " + path);
    const std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), f.get());
    std::fputc('\n', f.get());
}

}  // namespace hedgehog

#include "hedgehog/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace hedgehog::linalg {

void thomas_solve(std::size_t n, double* lower, double* diag, double* upper,
                  double* rhs) {
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

NewtonReport newton_tridiag(
    std::size_t n,
    const std::function<void(const double*, double*, double*, double*,
                             double*)>& fill,
    double* u, double tol, int maxit) {
    std::vector<double> res(n), lo(n), di(n), up(n), step(n), trial(n),
        res2(n), lo2(n), di2(n), up2(n);
    auto max_abs = [n](const double* v) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
        return m;
    };

    NewtonReport rep;
    fill(u, res.data(), lo.data(), di.data(), up.data());
    double rn = max_abs(res.data());
    for (int it = 0; it < maxit; ++it) {
        if (rn <= tol) {
            rep.converged = true;
            break;
        }
        rep.iterations = it + 1;
        // solve J step = res on copies (thomas clobbers its inputs)
        std::copy(res.begin(), res.end(), step.begin());
        std::vector<double> l(lo), d(di), p(up);
        thomas_solve(n, l.data(), d.data(), p.data(), step.data());

        double damp = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] - damp * step[i];
            fill(trial.data(), res2.data(), lo2.data(), di2.data(), up2.data());
            const double rn2 = max_abs(res2.data());
            if (rn2 < rn || rn2 <= tol) {
                std::copy(trial.begin(), trial.end(), u);
                res.swap(res2);
                lo.swap(lo2);
                di.swap(di2);
                up.swap(up2);
                rn = rn2;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if (!accepted) break;  // stuck; report the residual we have
    }
    if (rn <= tol) rep.converged = true;
    rep.residual = rn;
    return rep;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("CubicSpline: need matching arrays, n >= 2");
    m_.assign(n, 0.0);
    if (n == 2) return;
    // natural boundary conditions: solve for interior second derivatives
    const std::size_t k = n - 2;
    std::vector<double> lo(k - 1 + 1), di(k), up(k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double h0 = x_[i + 1] - x_[i];
        const double h1 = x_[i + 2] - x_[i + 1];
        di[i] = 2.0 * (h0 + h1);
        if (i + 1 < k) up[i] = h1;
        if (i > 0) lo[i - 1] = h0;
        rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0);
    }
    thomas_solve(k, lo.data(), di.data(), up.data(), rhs.data());
    for (std::size_t i = 0; i < k; ++i) m_[i + 1] = rhs[i];
}

std::size_t CubicSpline::segment(double x) const {
    const std::size_t n = x_.size();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= n) return n - 2;
    return i - 1;
}

double CubicSpline::eval(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h /
               6.0;
}

double CubicSpline::second_deriv(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
}

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre P_n(x) and derivative by recurrence
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

void legendre_bar(int lmax, double x, double* out) {
    const double inv_sqrt4pi = 0.28209479177387814347;  // 1/sqrt(4 pi)
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    out[legendre_index(0, 0)] = inv_sqrt4pi;
    double pmm = inv_sqrt4pi;
    for (int m = 1; m <= lmax; ++m) {
        pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        out[legendre_index(m, m)] = pmm;
    }
    for (int m = 0; m <= lmax; ++m) {
        if (m + 1 <= lmax)
            out[legendre_index(m + 1, m)] =
                std::sqrt(2.0 * m + 3.0) * x * out[legendre_index(m, m)];
        for (int l = m + 2; l <= lmax; ++l) {
            const double a =
                std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
            const double b = std::sqrt(
                ((double(l) - 1) * (l - 1) - double(m) * m) /
                (4.0 * (double(l) - 1) * (l - 1) - 1.0));
            out[legendre_index(l, m)] =
                a * (x * out[legendre_index(l - 1, m)] -
                     b * out[legendre_index(l - 2, m)]);
        }
    }
}

namespace {

int sturm_count(const std::vector<double>& d, const std::vector<double>& e,
                double sigma) {
    int count = 0;
    double q = 1.0;
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double off = (i == 0) ? 0.0 : e[i - 1] * e[i - 1] / q;
        q = d[i] - sigma - off;
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

double tridiag_eig_k(const std::vector<double>& d, const std::vector<double>& e,
                     int k, double tol) {
    const std::size_t n = d.size();
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        double rad = 0.0;
        if (i > 0) rad += std::fabs(e[i - 1]);
        if (i + 1 < n) rad += std::fabs(e[i]);
        lo = std::min(lo, d[i] - rad);
        hi = std::max(hi, d[i] + rad);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid) > k)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= tol * std::max(1.0, std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

int banded_count_below(std::size_t n, int hbw, const std::vector<double>& band,
                       double sigma) {
    std::vector<double> L(static_cast<std::size_t>(hbw + 1) * n, 0.0);
    std::vector<double> d(n, 0.0);
    int count = 0;
    for (std::size_t c = 0; c < n; ++c) {
        double dc = band[c] - sigma;
        const std::size_t kmin = (c >= static_cast<std::size_t>(hbw))
                                     ? c - hbw
                                     : 0;
        for (std::size_t k = kmin; k < c; ++k) {
            const double lck = L[(c - k) * n + k];
            dc -= lck * lck * d[k];
        }
        if (dc == 0.0) dc = -1e-300;
        d[c] = dc;
        if (dc < 0.0) ++count;
        for (int o = 1; o <= hbw && c + o < n; ++o) {
            double v = band[static_cast<std::size_t>(o) * n + c];
            const std::size_t r = c + o;
            const std::size_t kk = (r >= static_cast<std::size_t>(hbw))
                                       ? r - hbw
                                       : 0;
            for (std::size_t k = std::max(kk, kmin); k < c; ++k)
                v -= L[(r - k) * n + k] * L[(c - k) * n + k] * d[k];
            L[static_cast<std::size_t>(o) * n + c] = v / dc;
        }
    }
    return count;
}

double banded_eig_k(std::size_t n, int hbw, const std::vector<double>& band,
                    int k, double tol) {
    double lo = band[0], hi = band[0];
    for (std::size_t i = 0; i < n; ++i) {
        double rad = 0.0;
        for (int o = 1; o <= hbw; ++o) {
            if (i + o < n) rad += std::fabs(band[static_cast<std::size_t>(o) * n + i]);
            if (i >= static_cast<std::size_t>(o))
                rad += std::fabs(band[static_cast<std::size_t>(o) * n + (i - o)]);
        }
        lo = std::min(lo, band[i] - rad);
        hi = std::max(hi, band[i] + rad);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (banded_count_below(n, hbw, band, mid) > k)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= tol * std::max(1.0, std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

void jacobi_eigen(std::size_t n, std::vector<double>& a,
                  std::vector<double>& w, std::vector<double>* vecs) {
    if (vecs) {
        vecs->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*vecs)[i * n + i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a[p * n + q] * a[p * n + q];
        if (off < 1e-28 * std::max(1.0, [&] {
                double diag = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    diag += a[i * n + i] * a[i * n + i];
                return diag;
            }()))
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                if (vecs) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double vip = (*vecs)[i * n + p],
                                     viq = (*vecs)[i * n + q];
                        (*vecs)[i * n + p] = c * vip - s * viq;
                        (*vecs)[i * n + q] = s * vip + c * viq;
                    }
                }
            }
        }
    }
    w.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = a[i * n + i];
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return w[i] < w[j]; });
    std::vector<double> ws(n);
    for (std::size_t i = 0; i < n; ++i) ws[i] = w[order[i]];
    w = ws;
    if (vecs) {
        std::vector<double> vs(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                vs[i * n + j] = (*vecs)[i * n + order[j]];
        *vecs = vs;
    }
}

LobpcgResult lobpcg_smallest(
    const std::function<void(const double*, double*)>& apply_a,
    const std::vector<double>& mass_diag,
    const std::vector<double>& precond_diag, std::vector<double>& x,
    const LobpcgOptions& opts) {
    const std::size_t n = x.size();
    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    auto mdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * mass_diag[i] * b[i];
        return s;
    };

    std::vector<double> ax(n), p, ap, r(n), wv(n), aw(n);
    {
        const double nrm = std::sqrt(mdot(x, x));
        if (nrm == 0.0) throw std::invalid_argument("lobpcg: zero start vector");
        for (auto& v : x) v /= nrm;
    }
    apply_a(x.data(), ax.data());

    LobpcgResult res;
    for (int it = 0; it < opts.maxit; ++it) {
        res.iterations = it + 1;
        const double lambda = dot(x, ax) / mdot(x, x);
        res.lambda = lambda;
        double rn = 0.0, axn = 0.0, mxn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = ax[i] - lambda * mass_diag[i] * x[i];
            rn += r[i] * r[i];
            axn += ax[i] * ax[i];
            mxn += mass_diag[i] * x[i] * mass_diag[i] * x[i];
        }
        rn = std::sqrt(rn);
        res.residual = rn / (std::sqrt(axn) + std::fabs(lambda) * std::sqrt(mxn));
        if (res.residual <= opts.tol) {
            res.converged = true;
            return res;
        }

        for (std::size_t i = 0; i < n; ++i) wv[i] = precond_diag[i] * r[i];
        apply_a(wv.data(), aw.data());

        // basis [x, w, p] with mirrored A-images; M-orthonormalize by
        // modified Gram-Schmidt, dropping near-dependent directions
        std::vector<std::vector<double>*> S = {&x, &wv};
        std::vector<std::vector<double>*> AS = {&ax, &aw};
        if (!p.empty()) {
            S.push_back(&p);
            AS.push_back(&ap);
        }
        std::vector<std::vector<double>> basis, abasis;
        for (std::size_t c = 0; c < S.size(); ++c) {
            std::vector<double> v = *S[c], av = *AS[c];
            const double orig = std::sqrt(mdot(v, v));
            for (std::size_t b = 0; b < basis.size(); ++b) {
                const double proj = mdot(basis[b], v);
                for (std::size_t i = 0; i < n; ++i) {
                    v[i] -= proj * basis[b][i];
                    av[i] -= proj * abasis[b][i];
                }
            }
            const double nrm = std::sqrt(mdot(v, v));
            if (nrm < 1e-10 * std::max(orig, 1e-30)) continue;
            for (std::size_t i = 0; i < n; ++i) {
                v[i] /= nrm;
                av[i] /= nrm;
            }
            basis.push_back(std::move(v));
            abasis.push_back(std::move(av));
        }
        const std::size_t k = basis.size();
        if (k == 0) {
            res.converged = true;
            return res;
        }
        std::vector<double> g(k * k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                g[i * k + j] = dot(basis[i], abasis[j]);
        // symmetrize against roundoff
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) {
                const double v = 0.5 * (g[i * k + j] + g[j * k + i]);
                g[i * k + j] = g[j * k + i] = v;
            }
        std::vector<double> evals, evecs;
        jacobi_eigen(k, g, evals, &evecs);
        std::vector<double> y(k);
        for (std::size_t i = 0; i < k; ++i) y[i] = evecs[i * k + 0];

        std::vector<double> xn(n, 0.0), axn2(n, 0.0), pn(n, 0.0), apn(n, 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                xn[i] += y[b] * basis[b][i];
                axn2[i] += y[b] * abasis[b][i];
                if (b > 0) {  // p excludes the x-direction component
                    pn[i] += y[b] * basis[b][i];
                    apn[i] += y[b] * abasis[b][i];
                }
            }
        }
        x = std::move(xn);
        ax = std::move(axn2);
        p = std::move(pn);
        ap = std::move(apn);
        const double nrm = std::sqrt(mdot(x, x));
        for (std::size_t i = 0; i < n; ++i) {
            x[i] /= nrm;
            ax[i] /= nrm;
        }
    }
    return res;
}

}  // namespace hedgehog::linalg

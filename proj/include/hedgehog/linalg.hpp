#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace hedgehog::linalg {

// Solve a tridiagonal system in place.  diag/rhs have n entries, lower/upper
// n-1 (lower[i] couples row i+1 to i, upper[i] couples row i to i+1).
// All inputs are clobbered; the solution lands in rhs.
void thomas_solve(std::size_t n, double* lower, double* diag, double* upper,
                  double* rhs);

// Damped Newton iteration for F(u) = 0 where dF is tridiagonal.  `fill`
// computes the residual and Jacobian bands at the current iterate.  Steps are
// halved until the residual norm decreases (up to 30 halvings).  Returns the
// final max-norm of the residual; convergence means residual <= tol.
struct NewtonReport {
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};
NewtonReport newton_tridiag(
    std::size_t n,
    const std::function<void(const double* u, double* res, double* lower,
                             double* diag, double* upper)>& fill,
    double* u, double tol, int maxit = 60);

// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double eval(double x) const;
    double deriv(double x) const;
    double second_deriv(double x) const;

private:
    std::size_t segment(double x) const;
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at nodes
};

// Gauss-Legendre nodes and weights on [-1, 1], via Newton on the Legendre
// polynomial starting from the Chebyshev-like initial guess.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Orthonormal associated Legendre functions Pbar_l^m(x) for 0 <= m <= l <=
// lmax, normalized so that the real spherical harmonics
//   Y_l0 = Pbar_l^0,  Y_lm^c = sqrt(2) Pbar_l^m cos(m phi),
//   Y_lm^s = sqrt(2) Pbar_l^m sin(m phi)
// are orthonormal on the unit sphere.  Output is packed as
// out[l*(l+1)/2 + m].  No Condon-Shortley phase.
void legendre_bar(int lmax, double x, double* out);
inline std::size_t legendre_index(int l, int m) {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + m;
}

// k-th smallest eigenvalue (k = 0 is the smallest) of the symmetric
// tridiagonal matrix with diagonal d and off-diagonal e, by Sturm-sequence
// bisection.
double tridiag_eig_k(const std::vector<double>& d, const std::vector<double>& e,
                     int k, double tol = 1e-13);

// Symmetric banded matrix, lower storage: band[j*n + i] = A(i+j, i) for
// 0 <= j <= hbw, 0 <= i < n - j.  Returns the number of eigenvalues < sigma
// via the inertia of the LDL^T factorization of A - sigma I.
int banded_count_below(std::size_t n, int hbw, const std::vector<double>& band,
                       double sigma);

// k-th smallest eigenvalue of the banded matrix above, by bisection on the
// inertia count.
double banded_eig_k(std::size_t n, int hbw, const std::vector<double>& band,
                    int k, double tol = 1e-12);

// Dense symmetric eigensolver (cyclic Jacobi).  a is n x n row-major and is
// destroyed; eigenvalues come back ascending in w.  If vecs is non-null it
// receives the eigenvectors as columns (row-major n x n).
void jacobi_eigen(std::size_t n, std::vector<double>& a,
                  std::vector<double>& w, std::vector<double>* vecs = nullptr);

// Smallest eigenvalue of the pencil (A, M) with M diagonal positive, by
// single-vector LOBPCG with a diagonal preconditioner.  apply_a computes
// y = A x.  x holds the start vector and is overwritten with the eigenvector.
struct LobpcgOptions {
    int maxit = 600;
    double tol = 1e-8;  // relative residual ||Ax - lambda Mx|| / (||Ax|| + |lambda| ||Mx||)
};
struct LobpcgResult {
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};
LobpcgResult lobpcg_smallest(
    const std::function<void(const double* x, double* y)>& apply_a,
    const std::vector<double>& mass_diag,
    const std::vector<double>& precond_diag, std::vector<double>& x,
    const LobpcgOptions& opts = {});

}  // namespace hedgehog::linalg

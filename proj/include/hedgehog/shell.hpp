#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hedgehog/qtensor.hpp"

namespace hedgehog {

// Product grid on the shell 1 <= r <= R: uniform radial layers including
// both Dirichlet boundaries, Gauss-Legendre nodes in cos(theta) (strictly
// inside (0, pi), no pole nodes), uniform periodic phi.  The angular
// quadrature integrates products of spherical harmonics up to degree lmax
// exactly, which is what makes the per-layer harmonic analysis below an
// orthogonal transform.
struct ShellGrid {
    double R = 2.0;
    std::size_t Nr = 48, Ntheta = 24, Nphi = 48;

    double dr = 0.0;
    std::vector<double> r;               // Nr radii
    std::vector<double> ctheta, wtheta;  // Gauss-Legendre in cos(theta)
    std::vector<double> phi;             // Nphi angles
    std::vector<double> wang;            // per angular node, sums to 4 pi
    std::vector<Vec3> unit;              // unit direction per angular node
    std::size_t lmax = 0;

    std::size_t nang() const { return Ntheta * Nphi; }
    std::size_t nmodes() const { return (lmax + 1) * (lmax + 1); }
    bool same_shape(const ShellGrid& o) const {
        return R == o.R && Nr == o.Nr && Ntheta == o.Ntheta && Nphi == o.Nphi;
    }

    // Throws std::invalid_argument for R <= 1 or degenerate node counts.
    static ShellGrid make(double R, std::size_t Nr, std::size_t Ntheta,
                          std::size_t Nphi);
};

// Nodal tensor field, one coefficient plane per fixed-basis component,
// node index i * nang + (j * Nphi + k).
struct QField {
    std::array<std::vector<double>, 5> c;
    std::size_t nodes = 0;
};

QField make_field(const ShellGrid& g);

struct MinimizeOptions {
    double tol = 1e-5;  // stop when the state gradient 2-norm drops below
    int maxit = 3000;
    int memory = 8;             // quasi-Newton history
    bool gradient_flow = false; // plain preconditioned descent fallback
};

struct MinResult {
    double energy = 0.0;
    double gap = 0.0;       // energy minus the hedgehog energy
    double distance = 0.0;  // L2(Omega) distance to the hedgehog field
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Discretization of the shell energy
//   I[Q] = integral of 1/2 |grad Q|^2 + bulk_density(Q)
// over fields with Q = Q_b on both boundary spheres.  Every radial layer is
// stored as real spherical-harmonic coefficients of the five planes; the
// elastic term is then a sum of radial differences plus l(l+1) weights,
// while the bulk term is evaluated nodally through the synthesis transform.
// The optimizer state is the spectral coefficient block of the interior
// layers, which keeps descent inside the resolved angular band.
class ShellModel {
public:
    ShellModel(const ShellGrid& g, const ScalingParams& p);

    const ShellGrid& grid() const { return g_; }
    const ScalingParams& params() const { return p_; }

    // Discrete critical point of the radial (hedgehog) subspace: the exact
    // minimizer of the discretized energy among fields h(r) Q_b(x/|x|),
    // ends fixed to 1.  This is what makes the hedgehog state an exact
    // stationary point of energy() rather than an O(dr^2) approximation.
    const std::vector<double>& radial_profile() const { return h_; }
    double hedgehog_energy() const { return ehedge_; }

    std::size_t state_size() const { return nlayers_ * 5 * nm_; }
    std::vector<double> hedgehog_state() const;
    QField hedgehog_field() const;

    double energy(const std::vector<double>& s) const;
    double energy_grad(const std::vector<double>& s,
                       std::vector<double>& grad) const;

    // Action of the energy Hessian at the hedgehog state (the second
    // variation) on a state-shaped direction.
    void hessian_apply(const std::vector<double>& d,
                       std::vector<double>& out) const;

    // L2(Omega) weight of each state entry (diagonal by Parseval), and a
    // positive diagonal that approximates the Hessian for preconditioning.
    std::vector<double> mass_diag() const;
    std::vector<double> precond_diag() const;

    QField to_field(const std::vector<double>& s) const;
    std::vector<double> to_state(const QField& q) const;

    // QField-facing views: the energy of a nodal field is the energy of its
    // band-limited projection; the gradient is the matching cotangent with
    // zero rows on the boundary layers.
    double field_energy(const QField& q) const;
    QField field_gradient(const QField& q) const;

    // Terms of I[H + V] - I[H] evaluated in the moving frame attached to
    // the radial direction: elastic 1/2 |grad V|^2, the quadratic bulk
    // form, the two cubic integrals combined, and the quartic tail.  The
    // linear terms are absent because the discrete hedgehog is critical.
    struct ExpansionTerms {
        double elastic = 0.0, quadratic_bulk = 0.0, cubic = 0.0,
               quartic = 0.0;
        double total() const {
            return elastic + quadratic_bulk + cubic + quartic;
        }
        double quadratic() const { return elastic + quadratic_bulk; }
    };
    // Throws std::domain_error unless V vanishes identically on both
    // boundary layers.
    ExpansionTerms energy_difference_expansion(const QField& V) const;

    // The second variation delta^2 I[V] written as its own quadrature (the
    // displayed quadratic form), equal to twice ExpansionTerms::quadratic.
    double second_variation_form(const QField& V) const;

    MinResult minimize(const std::vector<double>& init,
                       const MinimizeOptions& opts) const;
    MinResult minimize(const QField& init, const MinimizeOptions& opts) const;

private:
    void synth_layer(const double* coef, double* nodal) const;
    const double* layer_coef(const std::vector<double>& s, std::size_t i,
                             int a) const;
    double elastic_energy(const std::vector<double>& s) const;
    void elastic_grad_acc(const std::vector<double>& s,
                          std::vector<double>& grad) const;

    ShellGrid g_;
    ScalingParams p_;
    std::size_t na_ = 0, nm_ = 0, nlayers_ = 0;
    std::vector<double> synth_;   // na x nm
    std::vector<double> synthT_;  // nm x na
    std::vector<double> lw_;      // l(l+1) per mode
    std::vector<double> h_;       // discrete radial profile, Nr values
    std::vector<double> ub_;      // boundary spectral coefficients, 5 x nm
    std::vector<double> bnod_;    // nodal boundary tensor planes, 5 x na
    std::vector<OrthFrame> frames_;  // moving frame per angular node
    double ehedge_ = 0.0;
};

// Hedgehog plus a smooth band-limited perturbation vanishing on both
// boundary spheres, scaled so the largest nodal Frobenius norm of the
// perturbation equals `amplitude`.  Equal seeds give identical fields.
QField random_admissible(const ShellModel& m, double amplitude,
                         std::uint64_t seed);

// L2(Omega) distance of two nodal fields by quadrature.  Throws
// std::domain_error when the fields do not live on g's node set.
double field_distance(const QField& a, const QField& b, const ShellGrid& g);

// Snapshot: one row per node with coordinates and the five coefficients,
// plus a JSON sidecar describing grid shape and parameters.
void write_field_csv(const std::string& path, const ShellGrid& g,
                     const QField& q);
void write_field_sidecar(const std::string& path, const ShellGrid& g,
                         const ScalingParams& p, std::uint64_t seed);

}  // namespace hedgehog

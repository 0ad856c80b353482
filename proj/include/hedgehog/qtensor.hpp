#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace hedgehog {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

// Symmetric traceless 3x3 tensor stored as five coefficients in the fixed
// orthonormal basis
//   B0 = diag(-1,-1,2)/sqrt(6)        B1 = (xy+yx)/sqrt(2)
//   B2 = (xz+zx)/sqrt(2)              B3 = (yz+zy)/sqrt(2)
//   B4 = diag(1,-1,0)/sqrt(2)
// so that the Frobenius inner product is the plain dot product of
// coefficient vectors.
struct QTensor {
    std::array<double, 5> c{};

    static QTensor from_matrix(const double m[3][3]);
    void matrix(double m[3][3]) const;

    double dot(const QTensor& o) const {
        double s = 0.0;
        for (int a = 0; a < 5; ++a) s += c[a] * o.c[a];
        return s;
    }
    double norm2() const { return dot(*this); }

    QTensor operator+(const QTensor& o) const {
        QTensor r;
        for (int a = 0; a < 5; ++a) r.c[a] = c[a] + o.c[a];
        return r;
    }
    QTensor operator-(const QTensor& o) const {
        QTensor r;
        for (int a = 0; a < 5; ++a) r.c[a] = c[a] - o.c[a];
        return r;
    }
    QTensor operator*(double a) const {
        QTensor r;
        for (int b = 0; b < 5; ++b) r.c[b] = a * c[b];
        return r;
    }
};

// Orthonormal frame (n, m, p) adapted to a point of the shell: n is radial,
// m and p span the tangent plane, det[n m p] = +1.
struct OrthFrame {
    Vec3 n, m, p;
};

// Frame at x/|x| built from spherical angles, with the azimuth fixed to 0 on
// the polar axis so the frame is defined everywhere.
OrthFrame radial_frame(const Vec3& x);

// The five frame tensors E = n(x)n - I/3, F = n(x)m + m(x)n,
// G = n(x)p + p(x)n, X = m(x)p + p(x)m, Y = m(x)m - p(x)p, expressed in the
// fixed coefficient basis.  |E|^2 = 2/3, the others have norm^2 = 2.
struct FrameBasis {
    QTensor E, F, G, X, Y;
};
FrameBasis frame_basis(const OrthFrame& f);

// Q = v0 E + v1 F + v2 G + v3 X + v4 Y
QTensor compose(const std::array<double, 5>& v, const OrthFrame& f);

// Inverse of compose: v0 = (3/2) <Q,E>, v_i = <Q,.>/2 for the unit-norm-2
// frame tensors.
std::array<double, 5> decompose(const QTensor& q, const OrthFrame& f);

struct Invariants {
    double norm2;  // |Q|^2
    double cubic;  // tr Q^3
};
Invariants invariants(const QTensor& q);

// s (n(x)n - I/3) for a unit vector n
QTensor uniaxial(double s, const Vec3& n);

// sqrt(3/2) (x^ (x) x^ - I/3), the boundary tensor of the rescaled problem
QTensor boundary_tensor(const Vec3& x);

// Reduced temperature t = 27|A|C/B^2 and the scaled uniaxial minimum
// h_plus = (3 + sqrt(9 + 8t))/4 of the bulk potential.  s_plus is the
// physical order parameter (B/3C) h_plus, available when the material
// constants were given.
struct ScalingParams {
    double t = 0.0;
    double h_plus = 1.5;
    std::optional<double> s_plus;
    std::optional<double> length_scale;  // elastic length sqrt(27 C L / 2 B^2)

    static ScalingParams from_t(double t);
};

// Map material constants (A < 0, B > 0, C > 0, L > 0) to the reduced
// parameters.  Throws std::invalid_argument outside that regime.
ScalingParams reduced_params(double A, double B, double C, double L);

// Bulk free energy density
//   f(Q) = (t/8) (1 - |Q|^2)^2 + (h_plus/8) (1 + 3|Q|^4 - 4 sqrt(6) tr Q^3),
// normalized so f >= 0 with equality exactly on the uniaxial minimum orbit.
double bulk_density(const QTensor& q, const ScalingParams& p);

// Coefficient-basis gradient and Hessian action of bulk_density.
std::array<double, 5> bulk_gradient(const QTensor& q, const ScalingParams& p);
std::array<double, 5> bulk_hessian_apply(const QTensor& q,
                                         const std::array<double, 5>& d,
                                         const ScalingParams& p);

}  // namespace hedgehog

#include "hedgehog/qtensor.hpp"

#include <stdexcept>

namespace hedgehog {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt6 = 2.4494897427831780982;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;
}  // namespace

QTensor QTensor::from_matrix(const double m[3][3]) {
    QTensor q;
    q.c[0] = (-m[0][0] - m[1][1] + 2.0 * m[2][2]) * kInvSqrt6;
    q.c[1] = (m[0][1] + m[1][0]) * kInvSqrt2;
    q.c[2] = (m[0][2] + m[2][0]) * kInvSqrt2;
    q.c[3] = (m[1][2] + m[2][1]) * kInvSqrt2;
    q.c[4] = (m[0][0] - m[1][1]) * kInvSqrt2;
    return q;
}

void QTensor::matrix(double m[3][3]) const {
    m[0][0] = -c[0] * kInvSqrt6 + c[4] * kInvSqrt2;
    m[1][1] = -c[0] * kInvSqrt6 - c[4] * kInvSqrt2;
    m[2][2] = 2.0 * c[0] * kInvSqrt6;
    m[0][1] = m[1][0] = c[1] * kInvSqrt2;
    m[0][2] = m[2][0] = c[2] * kInvSqrt2;
    m[1][2] = m[2][1] = c[3] * kInvSqrt2;
}

OrthFrame radial_frame(const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0)
        throw std::invalid_argument("radial_frame: undefined at the origin");
    const Vec3 n = x * (1.0 / r);
    const double st = std::hypot(n.x, n.y);
    const double ct = n.z;
    double cp = 1.0, sp = 0.0;  // azimuth pinned to 0 on the polar axis
    if (st > 0.0) {
        cp = n.x / st;
        sp = n.y / st;
    }
    OrthFrame f;
    f.n = n;
    f.m = {ct * cp, ct * sp, -st};
    f.p = {-sp, cp, 0.0};
    return f;
}

FrameBasis frame_basis(const OrthFrame& f) {
    auto sym_pair = [](const Vec3& a, const Vec3& b) {
        double m[3][3] = {{2.0 * a.x * b.x, a.x * b.y + a.y * b.x,
                           a.x * b.z + a.z * b.x},
                          {a.x * b.y + a.y * b.x, 2.0 * a.y * b.y,
                           a.y * b.z + a.z * b.y},
                          {a.x * b.z + a.z * b.x, a.y * b.z + a.z * b.y,
                           2.0 * a.z * b.z}};
        return QTensor::from_matrix(m);
    };
    FrameBasis b;
    b.E = uniaxial(1.0, f.n);
    b.F = sym_pair(f.n, f.m);
    b.G = sym_pair(f.n, f.p);
    b.X = sym_pair(f.m, f.p);
    {
        double m[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = 0.0;
        const Vec3& mm = f.m;
        const Vec3& pp = f.p;
        m[0][0] = mm.x * mm.x - pp.x * pp.x;
        m[1][1] = mm.y * mm.y - pp.y * pp.y;
        m[2][2] = mm.z * mm.z - pp.z * pp.z;
        m[0][1] = m[1][0] = mm.x * mm.y - pp.x * pp.y;
        m[0][2] = m[2][0] = mm.x * mm.z - pp.x * pp.z;
        m[1][2] = m[2][1] = mm.y * mm.z - pp.y * pp.z;
        b.Y = QTensor::from_matrix(m);
    }
    return b;
}

QTensor compose(const std::array<double, 5>& v, const OrthFrame& f) {
    const FrameBasis b = frame_basis(f);
    QTensor q;
    for (int a = 0; a < 5; ++a)
        q.c[a] = v[0] * b.E.c[a] + v[1] * b.F.c[a] + v[2] * b.G.c[a] +
                 v[3] * b.X.c[a] + v[4] * b.Y.c[a];
    return q;
}

std::array<double, 5> decompose(const QTensor& q, const OrthFrame& f) {
    const FrameBasis b = frame_basis(f);
    // E has |E|^2 = 2/3, the other frame tensors have norm^2 = 2
    return {1.5 * q.dot(b.E), 0.5 * q.dot(b.F), 0.5 * q.dot(b.G),
            0.5 * q.dot(b.X), 0.5 * q.dot(b.Y)};
}

Invariants invariants(const QTensor& q) {
    double m[3][3];
    q.matrix(m);
    const double det =
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[1][2]) -
        m[0][1] * (m[0][1] * m[2][2] - m[1][2] * m[0][2]) +
        m[0][2] * (m[0][1] * m[1][2] - m[1][1] * m[0][2]);
    return {q.norm2(), 3.0 * det};  // tr Q^3 = 3 det Q for traceless Q
}

QTensor uniaxial(double s, const Vec3& n) {
    double m[3][3];
    const double third = s / 3.0;
    m[0][0] = s * n.x * n.x - third;
    m[1][1] = s * n.y * n.y - third;
    m[2][2] = s * n.z * n.z - third;
    m[0][1] = m[1][0] = s * n.x * n.y;
    m[0][2] = m[2][0] = s * n.x * n.z;
    m[1][2] = m[2][1] = s * n.y * n.z;
    return QTensor::from_matrix(m);
}

QTensor boundary_tensor(const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0)
        throw std::invalid_argument("boundary_tensor: undefined at the origin");
    return uniaxial(std::sqrt(1.5), x * (1.0 / r));
}

ScalingParams ScalingParams::from_t(double t) {
    if (!(t >= 0.0))
        throw std::invalid_argument("ScalingParams: need t >= 0");
    ScalingParams p;
    p.t = t;
    p.h_plus = (3.0 + std::sqrt(9.0 + 8.0 * t)) / 4.0;
    return p;
}

ScalingParams reduced_params(double A, double B, double C, double L) {
    if (!(A < 0.0) || !(B > 0.0) || !(C > 0.0) || !(L > 0.0))
        throw std::invalid_argument(
            "reduced_params: need A < 0 and B, C, L > 0");
    ScalingParams p = ScalingParams::from_t(27.0 * (-A) * C / (B * B));
    p.s_plus = (B + std::sqrt(B * B + 24.0 * (-A) * C)) / (4.0 * C);
    p.length_scale = std::sqrt(27.0 * C * L / (2.0 * B * B));
    return p;
}

double bulk_density(const QTensor& q, const ScalingParams& p) {
    const Invariants inv = invariants(q);
    const double s = inv.norm2;
    return (p.t / 8.0) * (1.0 - s) * (1.0 - s) +
           (p.h_plus / 8.0) * (1.0 + 3.0 * s * s - 4.0 * kSqrt6 * inv.cubic);
}

namespace {

// projections of a symmetric matrix onto the coefficient basis
void project_sym(const double m[3][3], double out[5]) {
    out[0] = (-m[0][0] - m[1][1] + 2.0 * m[2][2]) * kInvSqrt6;
    out[1] = kSqrt2 * m[0][1];
    out[2] = kSqrt2 * m[0][2];
    out[3] = kSqrt2 * m[1][2];
    out[4] = (m[0][0] - m[1][1]) * kInvSqrt2;
}

void square_sym(const double q[3][3], double m[3][3]) {
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += q[i][k] * q[k][j];
            m[i][j] = m[j][i] = s;
        }
}

}  // namespace

std::array<double, 5> bulk_gradient(const QTensor& q, const ScalingParams& p) {
    double qm[3][3], m2[3][3], proj[5];
    q.matrix(qm);
    square_sym(qm, m2);
    project_sym(m2, proj);
    const double s = q.norm2();
    std::array<double, 5> g;
    for (int a = 0; a < 5; ++a)
        g[a] = (p.t / 2.0) * (s - 1.0) * q.c[a] +
               (p.h_plus / 8.0) * (12.0 * s * q.c[a] - 12.0 * kSqrt6 * proj[a]);
    return g;
}

std::array<double, 5> bulk_hessian_apply(const QTensor& q,
                                         const std::array<double, 5>& d,
                                         const ScalingParams& p) {
    QTensor dt;
    dt.c = d;
    double qm[3][3], dm[3][3], anti[3][3], proj[5];
    q.matrix(qm);
    dt.matrix(dm);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += qm[i][k] * dm[k][j] + dm[i][k] * qm[k][j];
            anti[i][j] = anti[j][i] = s;
        }
    project_sym(anti, proj);
    const double s = q.norm2();
    const double cd = q.dot(dt);
    std::array<double, 5> out;
    for (int a = 0; a < 5; ++a)
        out[a] = (p.t / 2.0) * ((s - 1.0) * d[a] + 2.0 * cd * q.c[a]) +
                 (p.h_plus / 8.0) * (24.0 * cd * q.c[a] + 12.0 * s * d[a] -
                                     12.0 * kSqrt6 * proj[a]);
    return out;
}

}  // namespace hedgehog

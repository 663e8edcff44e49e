#pragma once

#include <cmath>
#include <ostream>

#include <Eigen/Dense>

#include "fracop/errors.hpp"

namespace fracop {

/// Quaternion q = w + x e1 + y e2 + z e3 with Hamilton multiplication
/// (e1 e2 = e3, e2 e3 = e1, e3 e1 = e2, e_l^2 = -1).
struct Quaternion {
    double w{0}, x{0}, y{0}, z{0};

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_ = 0, double y_ = 0, double z_ = 0)
        : w(w_), x(x_), y(y_), z(z_) {}

    static constexpr Quaternion e1() { return {0, 1, 0, 0}; }
    static constexpr Quaternion e2() { return {0, 0, 1, 0}; }
    static constexpr Quaternion e3() { return {0, 0, 0, 1}; }

    constexpr bool operator==(const Quaternion&) const = default;

    constexpr Quaternion operator+(const Quaternion& o) const {
        return {w + o.w, x + o.x, y + o.y, z + o.z};
    }
    constexpr Quaternion operator-(const Quaternion& o) const {
        return {w - o.w, x - o.x, y - o.y, z - o.z};
    }
    constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }

    // Hamilton product; non-commutative.
    constexpr Quaternion operator*(const Quaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }
    constexpr Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
    friend constexpr Quaternion operator*(double s, const Quaternion& q) { return q * s; }
    constexpr Quaternion operator/(double s) const { return {w / s, x / s, y / s, z / s}; }

    constexpr Quaternion conj() const { return {w, -x, -y, -z}; }
    constexpr double re() const { return w; }
    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
    double vec_norm() const { return std::sqrt(x * x + y * y + z * z); }

    Quaternion inverse() const {
        const double n2 = norm2();
        return {w / n2, -x / n2, -y / n2, -z / n2};
    }

    bool is_finite() const {
        return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
    return os << "(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
}

/// 4x4 matrix of left multiplication v -> q v acting on components
/// (v0, v1, v2, v3). Orthogonal up to the factor |q|; skew for imaginary q.
inline Eigen::Matrix4d left_mult_matrix(const Quaternion& q) {
    Eigen::Matrix4d m;
    m << q.w, -q.x, -q.y, -q.z,
         q.x,  q.w, -q.z,  q.y,
         q.y,  q.z,  q.w, -q.x,
         q.z, -q.y,  q.x,  q.w;
    return m;
}

/// Spectral parameter s with its cached slice data: s0 = Re(s), s1 = |Vec(s)|,
/// axis in the unit sphere of imaginary quaternions (e1 by convention when
/// Vec(s) = 0).
struct SpectralParam {
    Quaternion s;
    double s0{0};
    double s1{0};
    double abs2{0};
    Quaternion axis{0, 1, 0, 0};

    SpectralParam() = default;
    explicit SpectralParam(const Quaternion& q) : s(q), s0(q.w), abs2(q.norm2()) {
        s1 = q.vec_norm();
        if (s1 > 0) axis = Quaternion{0, q.x / s1, q.y / s1, q.z / s1};
    }
    /// s = axis * t, the purely imaginary regime of the generation theorems.
    static SpectralParam imaginary(const Quaternion& axis, double t) {
        return SpectralParam(axis * t);
    }
    bool purely_imaginary(double tol = 1e-14) const {
        return std::abs(s0) <= tol * std::sqrt(abs2);
    }
    Quaternion conj() const { return s.conj(); }
};

/// Slice-polar form q = modulus (cos(angle) + axis sin(angle)),
/// angle in [0, pi], axis in the unit sphere of imaginary quaternions.
struct SlicePolar {
    double modulus{0};
    double angle{0};
    Quaternion axis{0, 1, 0, 0};

    Quaternion reconstruct() const {
        return Quaternion{std::cos(angle), 0, 0, 0} * modulus +
               axis * (modulus * std::sin(angle));
    }
};

/// Decompose q != 0. Real q get the conventional degenerate axis e1; every
/// downstream quantity must come out axis-independent for such inputs.
inline SlicePolar slice_polar(const Quaternion& q) {
    const double n = q.norm();
    if (n == 0.0) throw std::domain_error("slice_polar: zero quaternion has no polar form");
    SlicePolar p;
    p.modulus = n;
    const double vn = q.vec_norm();
    p.angle = std::atan2(vn, q.w);  // in [0, pi] since vn >= 0
    if (vn > 0.0) {
        p.axis = Quaternion{0, q.x / vn, q.y / vn, q.z / vn};
    } else {
        p.axis = Quaternion::e1();
    }
    return p;
}

/// Principal fractional power q^alpha computed in the slice plane of q.
/// The negative real half-line is a genuine branch cut for quaternions:
/// no alternative branch exists, so inputs there are rejected.
inline Quaternion quat_pow(const Quaternion& q, double alpha) {
    if (q.norm2() == 0.0) throw BranchCutError("quat_pow: q = 0 is not in the domain");
    if (q.vec_norm() == 0.0 && q.w < 0.0)
        throw BranchCutError("quat_pow: q on (-inf,0] hits the branch cut");
    const SlicePolar p = slice_polar(q);
    const double m = std::pow(p.modulus, alpha);
    const double th = alpha * p.angle;
    return Quaternion{std::cos(th), 0, 0, 0} * m + p.axis * (m * std::sin(th));
}

}  // namespace fracop

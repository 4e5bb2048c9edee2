#pragma once

#include "evflow/types.hpp"

namespace evflow {

/// Translational flow coefficient matrix: u_trans = (1/Z) A_x V.
inline Mat23 matrix_A(const Vec2& x) {
    Mat23 a;
    a << -1.0, 0.0, x.x(),
          0.0, -1.0, x.y();
    return a;
}

/// Rotational flow coefficient matrix: u_rot = B_x Omega.
inline Mat23 matrix_B(const Vec2& x) {
    Mat23 b;
    b << x.x() * x.y(), -(x.x() * x.x() + 1.0), x.y(),
         x.y() * x.y() + 1.0, -x.x() * x.y(), -x.x();
    return b;
}

/// Rotate an event's spatial coordinates by theta (row-vector convention,
/// X <- X R3(theta)): (x, y) -> (x cos + y sin, -x sin + y cos).
inline Vec2 rotate_point(const Vec2& p, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {p.x() * c + p.y() * s, -p.x() * s + p.y() * c};
}

/// Matching flow rotation, U <- U R2(theta).
inline Vec2 rotate_flow(const Vec2& u, double theta) {
    return rotate_point(u, theta);
}

/// Inverse of rotate_flow: right-multiplication by R(theta)^-1.
inline Vec2 derotate_flow(const Vec2& u, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {u.x() * c - u.y() * s, u.x() * s + u.y() * c};
}

} // namespace evflow

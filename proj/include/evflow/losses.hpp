#pragma once

#include <cmath>

#include "evflow/types.hpp"

namespace evflow {

constexpr double kDegenerateNorm = 1e-8;

/// Loss value with its gradient w.r.t. the prediction. Degenerate samples
/// (norms below kDegenerateNorm) report contributes=false and are skipped,
/// never propagated as NaN.
struct LossTerm {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    bool contributes = true;
};

/// Radial term: log((eps+||n-u/2||)/(eps+||u/2||))^2. Zero exactly when the
/// prediction lies on the circle with the optical flow u as diameter, i.e.
/// when n.(u-n)=0.
inline double radial_loss(const Vec2& u, const Vec2& n_hat, double eps) {
    const double a = (n_hat - 0.5 * u).norm();
    const double b = 0.5 * u.norm();
    const double l = std::log((eps + a) / (eps + b));
    return l * l;
}

inline LossTerm radial_loss_grad(const Vec2& u, const Vec2& n_hat, double eps) {
    LossTerm out;
    const Vec2 m = n_hat - 0.5 * u;
    const double a = m.norm();
    const double b = 0.5 * u.norm();
    const double l = std::log((eps + a) / (eps + b));
    out.value = l * l;
    if (a > kDegenerateNorm)
        out.grad = (2.0 * l / (eps + a)) * (m / a);
    return out;
}

/// Angular term: -cos of the angle between (n-u/2) and u. Minimal (-1) on the
/// ray from u/2 through u; +1 at the zero prediction, which blocks the
/// trivial all-zeros solution of the radial term.
inline LossTerm angular_loss_grad(const Vec2& u, const Vec2& n_hat) {
    LossTerm out;
    const Vec2 m = n_hat - 0.5 * u;
    const double mn = m.norm();
    const double un = u.norm();
    if (un < kDegenerateNorm || mn < kDegenerateNorm) {
        out.contributes = false;
        return out;
    }
    const double c = m.dot(u) / (mn * un);
    out.value = -c;
    out.grad = -(u / (mn * un)) + (m.dot(u) / (mn * mn * mn * un)) * m;
    return out;
}

inline double angular_loss(const Vec2& u, const Vec2& n_hat) {
    return angular_loss_grad(u, n_hat).value;
}

/// Sum of the radial and angular components. The two gradient fields are
/// orthogonal wherever both are nonzero, so the terms do not fight.
inline LossTerm motion_field_loss_grad(const Vec2& u, const Vec2& n_hat, double eps) {
    const LossTerm ang = angular_loss_grad(u, n_hat);
    if (!ang.contributes) return ang;
    const LossTerm rad = radial_loss_grad(u, n_hat, eps);
    return LossTerm{rad.value + ang.value, rad.grad + ang.grad, true};
}

inline double motion_field_loss(const Vec2& u, const Vec2& n_hat, double eps) {
    return radial_loss(u, n_hat, eps) + angular_loss(u, n_hat);
}

/// Ablation baseline (norm + direction): log((eps+||u||)/(eps+||uhat||))^2
/// minus the cosine between u and uhat. Trains the head towards full optical
/// flow instead of normal flow.
inline LossTerm baseline_norm_direction_loss_grad(const Vec2& u, const Vec2& u_hat, double eps) {
    LossTerm out;
    const double un = u.norm();
    const double hn = u_hat.norm();
    if (un < kDegenerateNorm || hn < kDegenerateNorm) {
        out.contributes = false;
        return out;
    }
    const double l = std::log((eps + un) / (eps + hn));
    const double c = u.dot(u_hat) / (un * hn);
    out.value = l * l - c;
    const Vec2 grad_l1 = (-2.0 * l / (eps + hn)) * (u_hat / hn);
    const Vec2 grad_l2 = -(u / (un * hn)) + (u.dot(u_hat) / (un * hn * hn * hn)) * u_hat;
    out.grad = grad_l1 + grad_l2;
    return out;
}

inline double baseline_norm_direction_loss(const Vec2& u, const Vec2& u_hat, double eps) {
    return baseline_norm_direction_loss_grad(u, u_hat, eps).value;
}

} // namespace evflow

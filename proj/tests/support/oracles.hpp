#pragma once

// Independent oracles for the unit and acceptance tests. Everything here
// deliberately avoids the library's own computational paths.

#include "jointfit/math.hpp"
#include "jointfit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

using jointfit::Mat3;
using jointfit::Quat;
using jointfit::Vec3;

inline Quat random_unit_quat(jointfit::Rng& rng) {
    Quat q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
    return q.normalized();
}

inline Vec3 random_vec3(jointfit::Rng& rng, double scale = 1.0) {
    return Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * scale;
}

// Orthogonal polar factor by Newton iteration X <- (X + X^-T)/2; converges to
// the same factor an SVD produces, through an unrelated computation.
inline Mat3 polar_factor_newton(const Mat3& M) {
    Mat3 X = M;
    for (int it = 0; it < 60; ++it) {
        const Mat3 next = 0.5 * (X + X.inverse().transpose());
        if ((next - X).cwiseAbs().maxCoeff() < 1e-15) return next;
        X = next;
    }
    return X;
}

// Rotation-vector (axis times angle) of a rotation matrix.
inline Vec3 rotation_vector(const Mat3& R) {
    const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double angle = std::acos(c);
    if (angle < 1e-12) return Vec3::Zero();
    Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    axis /= (2.0 * std::sin(angle));
    return axis * angle;
}

// World-frame angular velocity by central differences of rotation matrices.
inline Vec3 omega_finite_difference(const Mat3& R_minus, const Mat3& R_plus, double dt) {
    const Mat3 dR = R_plus * R_minus.transpose();
    return rotation_vector(dR) / (2.0 * dt);
}

// Smooth two-axis test trajectory with analytic quaternion derivatives:
// q(t) = qx(theta1(t)) * qz(theta2(t)), product rule for qdot / qddot.
struct SmoothQuatTrajectory {
    // theta1 = 0.8 sin(1.3 t) about x, theta2 = 0.5 t + 0.3 cos(2 t) about z.
    static double th1(double t) { return 0.8 * std::sin(1.3 * t); }
    static double th1d(double t) { return 0.8 * 1.3 * std::cos(1.3 * t); }
    static double th1dd(double t) { return -0.8 * 1.3 * 1.3 * std::sin(1.3 * t); }
    static double th2(double t) { return 0.5 * t + 0.3 * std::cos(2.0 * t); }
    static double th2d(double t) { return 0.5 - 0.6 * std::sin(2.0 * t); }
    static double th2dd(double t) { return -1.2 * std::cos(2.0 * t); }

    static Quat axis_quat(int axis, double th) {
        const double c = std::cos(th / 2), s = std::sin(th / 2);
        if (axis == 0) return Quat(c, s, 0, 0);
        if (axis == 1) return Quat(c, 0, s, 0);
        return Quat(c, 0, 0, s);
    }
    static Quat axis_quat_d(int axis, double th, double thd) {
        const double c = std::cos(th / 2), s = std::sin(th / 2);
        const double h = thd / 2;
        if (axis == 0) return Quat(-s * h, c * h, 0, 0);
        if (axis == 1) return Quat(-s * h, 0, c * h, 0);
        return Quat(-s * h, 0, 0, c * h);
    }
    static Quat axis_quat_dd(int axis, double th, double thd, double thdd) {
        const double c = std::cos(th / 2), s = std::sin(th / 2);
        const double h = thd / 2, g = thdd / 2;
        const double w = -c * h * h - s * g;
        const double v = -s * h * h + c * g;
        if (axis == 0) return Quat(w, v, 0, 0);
        if (axis == 1) return Quat(w, 0, v, 0);
        return Quat(w, 0, 0, v);
    }

    static Quat q(double t) { return axis_quat(0, th1(t)) * axis_quat(2, th2(t)); }
    static Quat qdot(double t) {
        return axis_quat_d(0, th1(t), th1d(t)) * axis_quat(2, th2(t)) +
               axis_quat(0, th1(t)) * axis_quat_d(2, th2(t), th2d(t));
    }
    static Quat qddot(double t) {
        return axis_quat_dd(0, th1(t), th1d(t), th1dd(t)) * axis_quat(2, th2(t)) +
               2.0 * (axis_quat_d(0, th1(t), th1d(t)) * axis_quat_d(2, th2(t), th2d(t))) +
               axis_quat(0, th1(t)) * axis_quat_dd(2, th2(t), th2d(t), th2dd(t));
    }
};

}  // namespace oracles

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace jointfit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Quaternion, scalar-first component order (w, x, y, z).
/// Unit quaternions represent world-from-body rotations, right-handed.
/// Non-unit values are legal and show up as quaternion derivatives.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    Quat() = default;
    Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    Vec3 vec() const { return Vec3(x, y, z); }
    Quat conj() const { return Quat(w, -x, -y, -z); }
    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

    Quat normalized() const {
        const double n = norm();
        if (n == 0.0) throw std::domain_error("degenerate quaternion");
        return Quat(w / n, x / n, y / n, z / n);
    }
};

inline Quat operator*(const Quat& a, const Quat& b) {
    return Quat(a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w);
}
inline Quat operator+(const Quat& a, const Quat& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Quat operator-(const Quat& a, const Quat& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Quat operator*(double s, const Quat& q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }

/// Intrinsic Z-Y-X Euler angles: yaw about z, then pitch about the new y,
/// then roll about the new x. pitch in [-pi/2, pi/2], yaw/roll in (-pi, pi].
/// near_gimbal is set when |pitch| comes within 1e-6 of pi/2; the angles are
/// still valid under the roll = 0 convention.
struct EulerZyx {
    double yaw = 0.0, pitch = 0.0, roll = 0.0;
    bool near_gimbal = false;

    /// Per-axis angle vector (roll, pitch, yaw), i.e. (theta_x, theta_y, theta_z).
    Vec3 axis_angles() const { return Vec3(roll, pitch, yaw); }
};

/// Vector part of a quaternion product plus the leftover scalar. The scalar
/// vanishes for exact unit-norm trajectories and is reported as a residual.
struct VecWithResidual {
    Vec3 value = Vec3::Zero();
    double scalar_residual = 0.0;
    bool renormalized_input = false;
};

/// Rotation matrix of q (world-from-body). Normalizes internally; throws
/// std::domain_error("degenerate quaternion") on zero norm.
Mat3 quat_to_rotmat(const Quat& q);

/// Quaternion of a rotation matrix (Shepperd's method). Result has w >= 0.
Quat rotmat_to_quat(const Mat3& R);

/// Nearest rotation matrix to M in the Frobenius norm, via SVD polar
/// decomposition with determinant correction. Throws
/// std::domain_error("degenerate frame") when the smallest singular value is
/// below 1e-12 times the largest.
Mat3 nearest_orthonormal(const Mat3& M);

/// omega = vec(2 * q_dot * conj(q)). For world-from-body q this is the
/// world-frame angular velocity; for a relative quaternion it is the relative
/// angular velocity in the base frame.
VecWithResidual angular_velocity_from_quat(const Quat& q, const Quat& q_dot);

/// alpha = vec(2 * (q_ddot * conj(q) - (q_dot * conj(q))^2)), same frame
/// conventions as angular_velocity_from_quat.
VecWithResidual angular_acceleration_from_quat(const Quat& q, const Quat& q_dot, const Quat& q_ddot);

/// Intrinsic Z-Y-X decomposition of q. Near gimbal lock (|pitch| within 1e-6
/// of pi/2) roll is set to 0 and near_gimbal flagged.
EulerZyx quat_to_euler_zyx(const Quat& q);

Quat euler_zyx_to_quat(const EulerZyx& e);
Mat3 euler_zyx_to_rotmat(const EulerZyx& e);

/// Unit quaternion for a rotation of `angle` radians about `axis`.
Quat quat_from_axis_angle(const Vec3& axis, double angle);

}  // namespace jointfit

#include "jointfit/math.hpp"

#include <Eigen/SVD>

#include <numbers>

namespace jointfit {

namespace {

constexpr double kPi = std::numbers::pi;

// Map atan2's -pi to +pi so yaw/roll land in (-pi, pi].
double wrap_half_open(double a) {
    if (a <= -kPi) return a + 2.0 * kPi;
    return a;
}

}  // namespace

Mat3 quat_to_rotmat(const Quat& q_in) {
    const Quat q = q_in.normalized();
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Quat rotmat_to_quat(const Mat3& R) {
    // Shepperd: pick the largest of trace / diagonal entries for stability.
    const double tr = R.trace();
    Quat q;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q = Quat(0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s);
    } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
        double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;
        q = Quat((R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s);
    } else if (R(1, 1) > R(2, 2)) {
        double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;
        q = Quat((R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s);
    } else {
        double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;
        q = Quat((R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s);
    }
    if (q.w < 0.0) q = -1.0 * q;
    return q.normalized();
}

Mat3 nearest_orthonormal(const Mat3& M) {
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(2) < 1e-12 * sv(0)) {
        throw std::domain_error("degenerate frame");
    }
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0.0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1.0;
        R = svd.matrixU() * D * svd.matrixV().transpose();
    }
    return R;
}

VecWithResidual angular_velocity_from_quat(const Quat& q_in, const Quat& q_dot) {
    VecWithResidual out;
    Quat q = q_in;
    if (std::abs(q.norm() - 1.0) > 1e-6) out.renormalized_input = true;
    q = q.normalized();
    const Quat w = 2.0 * (q_dot * q.conj());
    out.value = w.vec();
    out.scalar_residual = w.w;
    return out;
}

VecWithResidual angular_acceleration_from_quat(const Quat& q_in, const Quat& q_dot, const Quat& q_ddot) {
    VecWithResidual out;
    Quat q = q_in;
    if (std::abs(q.norm() - 1.0) > 1e-6) out.renormalized_input = true;
    q = q.normalized();
    const Quat r = q_dot * q.conj();
    const Quat a = 2.0 * ((q_ddot * q.conj()) - (r * r));
    out.value = a.vec();
    out.scalar_residual = a.w;
    return out;
}

EulerZyx quat_to_euler_zyx(const Quat& q_in) {
    const Mat3 R = quat_to_rotmat(q_in);
    EulerZyx e;
    const double sp = std::clamp(-R(2, 0), -1.0, 1.0);
    e.pitch = std::asin(sp);
    if (kPi / 2.0 - std::abs(e.pitch) < 1e-6) {
        // Gimbal proximity: only yaw -/+ roll is observable; fix roll = 0.
        e.near_gimbal = true;
        e.roll = 0.0;
        e.yaw = wrap_half_open(std::atan2(-R(0, 1), R(1, 1)));
    } else {
        e.yaw = wrap_half_open(std::atan2(R(1, 0), R(0, 0)));
        e.roll = wrap_half_open(std::atan2(R(2, 1), R(2, 2)));
    }
    return e;
}

Quat euler_zyx_to_quat(const EulerZyx& e) {
    const Quat qz(std::cos(e.yaw / 2), 0, 0, std::sin(e.yaw / 2));
    const Quat qy(std::cos(e.pitch / 2), 0, std::sin(e.pitch / 2), 0);
    const Quat qx(std::cos(e.roll / 2), std::sin(e.roll / 2), 0, 0);
    return (qz * qy * qx).normalized();
}

Mat3 euler_zyx_to_rotmat(const EulerZyx& e) {
    return quat_to_rotmat(euler_zyx_to_quat(e));
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) throw std::domain_error("zero rotation axis");
    const Vec3 u = axis / n;
    const double h = angle / 2.0;
    const double s = std::sin(h);
    return Quat(std::cos(h), s * u.x(), s * u.y(), s * u.z());
}

}  // namespace jointfit

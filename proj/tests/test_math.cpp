#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jointfit/math.hpp"
#include "jointfit/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace jointfit;
using oracles::random_unit_quat;

namespace {
constexpr double kPi = std::numbers::pi;

double frobenius_orthonormality_defect(const Mat3& R) {
    return (R.transpose() * R - Mat3::Identity()).norm();
}
}  // namespace

TEST_CASE("quat_to_rotmat identity and quarter turn") {
    CHECK((quat_to_rotmat(Quat(1, 0, 0, 0)) - Mat3::Identity()).norm() == doctest::Approx(0.0));

    const double s = std::sqrt(2.0) / 2.0;
    const Mat3 R = quat_to_rotmat(Quat(s, 0, 0, s));
    CHECK((R.col(0) - Vec3(0, 1, 0)).norm() < 1e-12);
    CHECK((R * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("quat_to_rotmat composition matches quaternion product") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Quat a = random_unit_quat(rng);
        const Quat b = random_unit_quat(rng);
        const Mat3 lhs = quat_to_rotmat(a * b);
        const Mat3 rhs = quat_to_rotmat(a) * quat_to_rotmat(b);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(frobenius_orthonormality_defect(lhs) <= 1e-9);
    }
}

TEST_CASE("q and -q give the same rotation; zero quaternion throws") {
    Rng rng(3);
    const Quat q = random_unit_quat(rng);
    CHECK((quat_to_rotmat(q) - quat_to_rotmat(-1.0 * q)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_WITH_AS(quat_to_rotmat(Quat(0, 0, 0, 0)), "degenerate quaternion",
                         std::domain_error);
}

TEST_CASE("nearest_orthonormal on rotations and scaled identity") {
    Rng rng(11);
    const Mat3 R = quat_to_rotmat(random_unit_quat(rng));
    CHECK((nearest_orthonormal(R) - R).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((nearest_orthonormal(2.0 * Mat3::Identity()) - Mat3::Identity()).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("nearest_orthonormal matches independent polar-factor oracle") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const Mat3 R = quat_to_rotmat(random_unit_quat(rng));
        Mat3 N;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) N(r, c) = rng.gaussian();
        const Mat3 M = R + 0.05 * N;
        const Mat3 got = nearest_orthonormal(M);
        const Mat3 want = oracles::polar_factor_newton(M);
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(frobenius_orthonormality_defect(got) <= 1e-9);
        CHECK(got.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("nearest_orthonormal is an idempotent projection") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        Mat3 M;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) M(r, c) = rng.gaussian();
        if (std::abs(M.determinant()) < 1e-3) continue;
        const Mat3 once = nearest_orthonormal(M);
        const Mat3 twice = nearest_orthonormal(once);
        CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("nearest_orthonormal rejects rank-deficient input") {
    Mat3 M = Mat3::Zero();
    M(0, 0) = 1.0;
    M(1, 1) = 1.0;
    CHECK_THROWS_WITH_AS(nearest_orthonormal(M), "degenerate frame", std::domain_error);
}

TEST_CASE("angular velocity of a constant-rate spin") {
    const double w0 = 2.4;
    const double t = 0.37;
    const Quat q(std::cos(w0 * t / 2), 0, 0, std::sin(w0 * t / 2));
    const Quat qd(-w0 / 2 * std::sin(w0 * t / 2), 0, 0, w0 / 2 * std::cos(w0 * t / 2));
    const auto res = angular_velocity_from_quat(q, qd);
    CHECK((res.value - Vec3(0, 0, w0)).norm() < 1e-12);
    CHECK(std::abs(res.scalar_residual) < 1e-12);

    const auto zero = angular_velocity_from_quat(q, Quat(0, 0, 0, 0));
    CHECK(zero.value.norm() == 0.0);
}

TEST_CASE("angular velocity is linear in qdot at fixed q") {
    Rng rng(19);
    for (int i = 0; i < 50; ++i) {
        const Quat q = random_unit_quat(rng);
        const Quat d1(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
        const Quat d2(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const Vec3 lhs = angular_velocity_from_quat(q, a * d1 + b * d2).value;
        const Vec3 rhs =
            a * angular_velocity_from_quat(q, d1).value + b * angular_velocity_from_quat(q, d2).value;
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}

TEST_CASE("angular velocity matches finite differences of the rotation matrix") {
    using T = oracles::SmoothQuatTrajectory;
    const double dt = 1.0 / 1200.0;
    for (double t = 0.1; t < 2.0; t += 0.17) {
        const Vec3 w = angular_velocity_from_quat(T::q(t), T::qdot(t)).value;
        const Vec3 w_fd = oracles::omega_finite_difference(quat_to_rotmat(T::q(t - dt)),
                                                           quat_to_rotmat(T::q(t + dt)), dt);
        CHECK((w - w_fd).norm() < 1e-6);
    }
}

TEST_CASE("angular acceleration: constant and quadratic spins") {
    const double w0 = 1.1, t = 0.41;
    const Quat q(std::cos(w0 * t / 2), 0, 0, std::sin(w0 * t / 2));
    const Quat qd(-w0 / 2 * std::sin(w0 * t / 2), 0, 0, w0 / 2 * std::cos(w0 * t / 2));
    const Quat qdd(-w0 * w0 / 4 * std::cos(w0 * t / 2), 0, 0, -w0 * w0 / 4 * std::sin(w0 * t / 2));
    CHECK(angular_acceleration_from_quat(q, qd, qdd).value.norm() < 1e-12);

    CHECK(angular_acceleration_from_quat(q, Quat(0, 0, 0, 0), Quat(0, 0, 0, 0)).value.norm() == 0.0);

    // theta(t) = a0 t^2 / 2 about z.
    const double a0 = 1.5;
    for (double tt : {0.2, 0.9, 1.7}) {
        const double th = a0 * tt * tt / 2, thd = a0 * tt, thdd = a0;
        const Quat qq(std::cos(th / 2), 0, 0, std::sin(th / 2));
        const Quat qqd(-std::sin(th / 2) * thd / 2, 0, 0, std::cos(th / 2) * thd / 2);
        const Quat qqdd(-std::cos(th / 2) * thd * thd / 4 - std::sin(th / 2) * thdd / 2, 0, 0,
                        -std::sin(th / 2) * thd * thd / 4 + std::cos(th / 2) * thdd / 2);
        const auto res = angular_acceleration_from_quat(qq, qqd, qqdd);
        CHECK((res.value - Vec3(0, 0, a0)).norm() < 1e-8);
    }
}

TEST_CASE("angular acceleration matches finite differences") {
    using T = oracles::SmoothQuatTrajectory;
    const double dt = 1.0 / 1200.0;
    for (double t = 0.1; t < 2.0; t += 0.23) {
        const Vec3 a = angular_acceleration_from_quat(T::q(t), T::qdot(t), T::qddot(t)).value;
        auto w_fd = [&](double tc) {
            return oracles::omega_finite_difference(quat_to_rotmat(T::q(tc - dt)),
                                                    quat_to_rotmat(T::q(tc + dt)), dt);
        };
        const Vec3 a_fd = (w_fd(t + dt) - w_fd(t - dt)) / (2.0 * dt);
        CHECK((a - a_fd).norm() < 1e-5);
    }
}

TEST_CASE("euler zyx basics") {
    const EulerZyx id = quat_to_euler_zyx(Quat(1, 0, 0, 0));
    CHECK(id.yaw == doctest::Approx(0.0));
    CHECK(id.pitch == doctest::Approx(0.0));
    CHECK(id.roll == doctest::Approx(0.0));

    const double s = std::sqrt(2.0) / 2.0;
    const EulerZyx qz = quat_to_euler_zyx(Quat(s, 0, 0, s));
    CHECK(qz.yaw == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(qz.pitch == doctest::Approx(0.0));
    CHECK(qz.roll == doctest::Approx(0.0));
    CHECK_FALSE(qz.near_gimbal);
}

TEST_CASE("euler zyx round trip over random rotations") {
    Rng rng(23);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const Quat q = random_unit_quat(rng);
        const EulerZyx e = quat_to_euler_zyx(q);
        CHECK(e.pitch >= -kPi / 2);
        CHECK(e.pitch <= kPi / 2);
        CHECK(e.yaw > -kPi);
        CHECK(e.yaw <= kPi);
        CHECK(e.roll > -kPi);
        CHECK(e.roll <= kPi);
        if (e.near_gimbal) continue;
        ++checked;
        CHECK((euler_zyx_to_rotmat(e) - quat_to_rotmat(q)).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(checked > 990);
}

TEST_CASE("euler -> quat -> euler identity away from gimbal lock") {
    Rng rng(29);
    for (int i = 0; i < 300; ++i) {
        EulerZyx e;
        e.yaw = rng.uniform(-kPi + 1e-6, kPi);
        e.pitch = rng.uniform(-kPi / 2 + 1e-3, kPi / 2 - 1e-3);
        e.roll = rng.uniform(-kPi + 1e-6, kPi);
        const EulerZyx back = quat_to_euler_zyx(euler_zyx_to_quat(e));
        CHECK(std::abs(back.yaw - e.yaw) < 1e-9);
        CHECK(std::abs(back.pitch - e.pitch) < 1e-9);
        CHECK(std::abs(back.roll - e.roll) < 1e-9);
    }
}

TEST_CASE("gimbal-lock proximity is flagged with roll fixed to zero") {
    EulerZyx e;
    e.yaw = 0.7;
    e.pitch = kPi / 2 - 1e-8;
    e.roll = 0.3;
    const EulerZyx back = quat_to_euler_zyx(euler_zyx_to_quat(e));
    CHECK(back.near_gimbal);
    CHECK(back.roll == 0.0);
    // Only yaw - roll is observable at the singularity.
    CHECK(std::abs(back.yaw - (e.yaw - e.roll)) < 1e-6);
}

TEST_CASE("unit norm is restored by normalization") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        Quat q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
        if (q.norm() == 0.0) continue;
        CHECK(std::abs(q.normalized().norm() - 1.0) <= 1e-9);
    }
}

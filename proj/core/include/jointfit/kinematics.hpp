#pragma once

#include "jointfit/math.hpp"
#include "jointfit/signal.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace jointfit::kin {

/// Timestamped pose of one rigid body in the world frame.
struct PoseSample {
    double t = 0.0;  // s
    Vec3 p = Vec3::Zero();
    Quat q;  // world-from-body
};

/// Uniformly sampled pose trajectory of one body. validate() enforces
/// strictly increasing timestamps with a constant interval (1e-9 s) and
/// renormalizes quaternions.
struct BodyTrajectory {
    std::string body_id;
    std::vector<PoseSample> samples;

    void validate();
    double sample_rate() const;
};

/// Rule mapping three labelled markers to a body frame, plus the markers'
/// body-frame positions used when synthesizing marker data.
struct MarkerFrameSpec {
    std::string origin_id, xaxis_id, plane_id;
    Vec3 origin_pos = Vec3::Zero();
    Vec3 xaxis_pos = Vec3(0.1, 0, 0);
    Vec3 plane_pos = Vec3(0, 0.1, 0);
};

/// Joint-related offsets of one joint.
///   r1, r2     : CoM-to-head-joint / CoM-to-tail-joint offsets of the
///                *current* (follower) link, in its body frame.
///   r1_alg     : tracking-point-to-joint offset on the base link, base body
///                frame (points from the tracking point toward the joint).
///   r2_alg     : joint-to-tracking-point offset on the follower link,
///                follower body frame (points from the joint toward the
///                tracking point).
struct JointGeometry {
    Vec3 r1 = Vec3::Zero();
    Vec3 r2 = Vec3::Zero();
    Vec3 r1_alg = Vec3::Zero();
    Vec3 r2_alg = Vec3::Zero();
};

/// Per-sample relative state of one joint, expressed in the joint's base
/// frame. theta holds the Z-Y-X Euler angles as per-axis components
/// (theta_x, theta_y, theta_z).
struct JointStateSample {
    double t = 0.0;
    Vec3 delta = Vec3::Zero();       // m
    Vec3 vel = Vec3::Zero();         // m/s
    Vec3 theta = Vec3::Zero();       // rad
    Vec3 theta_rate = Vec3::Zero();  // rad/s
    bool valid = true;
};

struct JointStateSeries {
    std::string joint_id;
    double sample_rate = 0.0;
    std::vector<JointStateSample> samples;
};

/// Per-sample world-frame motion of one link: orientation plus angular
/// velocity/acceleration. Feeds the net-torque target of the identification.
struct LinkMotionSample {
    double t = 0.0;
    Quat q;  // world-from-body
    Vec3 omega = Vec3::Zero();  // rad/s, world
    Vec3 alpha = Vec3::Zero();  // rad/s^2, world
    bool valid = true;
};

struct LinkMotionSeries {
    std::string body_id;
    double sample_rate = 0.0;
    std::vector<LinkMotionSample> samples;
};

enum class ThetaRateMode {
    kQuaternion,       // omega from 2 * qdot * conj(q) of the relative quaternion
    kEulerDerivative,  // differentiated (unwrapped) Euler angle channels
};

/// Filtering / differentiation configuration for the trajectory-to-joint-state
/// pipeline. No filtering is applied when cutoff_hz is empty.
struct FilteringConfig {
    std::optional<double> cutoff_hz;
    int window = 21;
    int degree = 2;
    ThetaRateMode theta_rate_mode = ThetaRateMode::kQuaternion;
};

struct FramePose {
    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
};

/// Body frame from three markers (origin, x-axis, plane): x toward the x-axis
/// marker, z along x cross (origin->plane), y completing the right-handed
/// triad, orthonormalized via nearest_orthonormal. Throws
/// std::domain_error("degenerate marker set") for collinear markers
/// (triangle area <= 1e-8 m^2).
FramePose frame_from_markers(const std::array<Vec3, 3>& markers);

/// R1^T * R2: rotation of frame 2 relative to frame 1.
Mat3 relative_rotation(const Mat3& R1, const Mat3& R2);

/// Relative joint translation in the base frame from two tracking points:
/// X = x1 - x2, X_img = -R1*r1_alg - R2*r2_alg, X_rel = X_img - X, returned
/// as R1^T * X_rel. Index 1 is the base link, index 2 the follower; with the
/// JointGeometry sign conventions the result is the follower-side attach
/// point relative to the base-side attach point.
Vec3 relative_translation(const Vec3& x1, const Vec3& x2, const Mat3& R1, const Mat3& R2,
                          const Vec3& r1_alg, const Vec3& r2_alg);

/// Full pipeline from a time-aligned base/follower trajectory pair to the
/// joint state series: relative pose per sample, optional zero-phase
/// filtering of every channel, Euler decomposition, sliding-window
/// differentiation, and quaternion-rate angular velocity. The first and last
/// window/2 samples are flagged invalid.
JointStateSeries joint_state_series(const BodyTrajectory& base, const BodyTrajectory& follower,
                                    const JointGeometry& geom, const FilteringConfig& cfg);

/// World-frame orientation, angular velocity and acceleration of one link
/// from its pose trajectory, with the same filtering scheme.
LinkMotionSeries link_motion_series(const BodyTrajectory& traj, const FilteringConfig& cfg);

/// Flip quaternion signs in place so consecutive samples stay in the same
/// hemisphere (q and -q are the same rotation, but filtering needs a
/// continuous representative).
void make_sign_continuous(std::vector<Quat>& qs);

}  // namespace jointfit::kin

#pragma once

#include "jointfit/kinematics.hpp"
#include "jointfit/math.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace jointfit::sim {

/// Spring/damper constants of one 6-DOF joint. kp/kd act on the relative
/// translation and its rate (N/m, N·s/m); kp_rot/kd_rot act on the Z-Y-X
/// Euler angles of the relative rotation and the relative angular velocity
/// (N·m/rad, N·m·s/rad). Negative values are legal but flagged by the
/// simulator.
struct JointCoefficients {
    Vec3 kp = Vec3::Zero();
    Vec3 kd = Vec3::Zero();
    Vec3 kp_rot = Vec3::Zero();
    Vec3 kd_rot = Vec3::Zero();

    bool any_negative() const {
        return (kp.array() < 0).any() || (kd.array() < 0).any() ||
               (kp_rot.array() < 0).any() || (kd_rot.array() < 0).any();
    }
};

/// Mass properties of one link plus its joint attach offsets: r1 points from
/// the CoM to the head-joint attach, r2 from the CoM to the tail-joint
/// attach, both in the link body frame.
struct LinkProperties {
    double mass = 1.0;
    Mat3 inertia = Mat3::Identity();  // body frame, kg·m^2
    Vec3 r1 = Vec3::Zero();
    Vec3 r2 = Vec3::Zero();
};

/// One joint: coefficients plus the neutral relative pose at which all spring
/// displacements vanish (follower relative to base).
struct JointSpec {
    std::string name;
    JointCoefficients coeffs;
    Vec3 neutral_translation = Vec3::Zero();
    Quat neutral_rotation;
};

/// Serial chain in maximal coordinates. n links imply n joints; joints[0]
/// anchors links[0] to the world at anchor_point (world frame is its base).
struct ChainModel {
    std::vector<LinkProperties> links;
    std::vector<JointSpec> joints;
    std::vector<std::string> link_names;
    Vec3 gravity = Vec3(0, 0, -9.81);
    Vec3 anchor_point = Vec3::Zero();
    /// When set, every joint's neutral pose is re-seeded from the initial
    /// state at the start of simulate().
    bool neutral_from_initial = true;

    void validate() const;
};

/// Fixed-step RK4 configuration. rel_tol/abs_tol are diagnostic thresholds
/// for the built-in step-doubling check, not adaptive controls.
struct SimConfig {
    double dt_output = 1.0 / 120.0;
    int substeps = 10;
    double rel_tol = 1e-6;
    double abs_tol = 1e-8;
    bool step_doubling_check = true;
};

struct LinkState {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Quat q;                     // world-from-body
    Vec3 w = Vec3::Zero();      // world-frame angular velocity
};

using SimState = std::vector<LinkState>;

/// Relative joint state in the joint base frame, neutral-adjusted.
struct JointRelativeState {
    Vec3 delta = Vec3::Zero();
    Vec3 delta_rate = Vec3::Zero();
    Vec3 theta = Vec3::Zero();
    Vec3 theta_rate = Vec3::Zero();
};

struct JointWrench {
    Vec3 force = Vec3::Zero();   // N, joint base frame
    Vec3 torque = Vec3::Zero();  // N·m, joint base frame
};

struct NetWrench {
    Vec3 force = Vec3::Zero();   // N, world
    Vec3 torque = Vec3::Zero();  // N·m, world, about the link CoM
};

struct WrenchSample {
    double t = 0.0;
    Vec3 force = Vec3::Zero();
    Vec3 torque = Vec3::Zero();
};

struct WrenchSeries {
    std::string joint_id;
    std::vector<WrenchSample> samples;
};

struct SimOutput {
    std::vector<kin::BodyTrajectory> poses;          // one per link
    std::vector<kin::JointStateSeries> joint_states; // ground truth, one per joint
    std::vector<WrenchSeries> wrenches;              // ground truth, one per joint
    std::vector<kin::LinkMotionSeries> link_motion;  // ground truth, one per link
    std::vector<std::string> warnings;
    long tolerance_exceedances = 0;
};

class SimDivergedError : public std::runtime_error {
public:
    SimDivergedError(long step, const std::string& msg) : std::runtime_error(msg), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/// Spring-damper load of one joint (the wrench the joint transmits to its
/// base side), in the joint base frame:
///   F = kp .* delta + kd .* delta_rate
///   tau = kp_rot .* theta + kd_rot .* theta_rate
/// The follower link receives the restoring reaction -F / -tau.
JointWrench joint_wrench(const JointRelativeState& state, const JointCoefficients& coeffs);

/// Euler's equation solved for the angular acceleration:
/// alpha = Iw^{-1} (tau_net - w x (Iw * w)), Iw the world-frame inertia.
Vec3 gyroscopic_rhs(const Mat3& Iw, const Vec3& w, const Vec3& tau_net);

/// Relative state of joint `joint` (base frame, neutral-adjusted) for the
/// given chain state.
JointRelativeState joint_relative_state(const ChainModel& model, const SimState& state, int joint);

/// Net force and net torque about the CoM of link `link`: gravity plus the
/// head-joint wrench (restoring, applied at the link's head attach point)
/// minus the tail-joint reaction (applied at the next link's head attach
/// point, so the joint transmits zero net wrench).
NetWrench net_wrench_on_link(const ChainModel& model, const SimState& state, int link);

/// Single RK4 step of dt seconds. Quaternions are renormalized afterwards.
SimState step(const SimState& state, const ChainModel& model, double dt);

/// Chain assembled at the neutral pose of every joint, at rest.
SimState neutral_state(const ChainModel& model);

/// Internal RK4 step rate (1/s) above which every spring mode stays well
/// resolved: 10 * max over DOFs of sqrt(k/m) style frequencies.
double recommended_step_rate(const ChainModel& model);

/// Fixed-rate forward simulation. Ground-truth channels come from the
/// internal state, never from re-differentiation. Throws SimDivergedError on
/// non-finite state.
SimOutput simulate(const ChainModel& model, const SimConfig& config, double duration,
                   const SimState& initial);

}  // namespace jointfit::sim

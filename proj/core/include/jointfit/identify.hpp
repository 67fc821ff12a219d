#pragma once

#include "jointfit/dynamics.hpp"
#include "jointfit/kinematics.hpp"
#include "jointfit/math.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace jointfit::ident {

/// Stacked least-squares problem A c = b. Rows come in triples (one net-torque
/// vector per sample); columns follow the stacking order
/// [K_head; K_tail; K_theta_head; K_theta_tail; biases], each K block
/// interleaved per axis as (kpx, kdx, kpy, kdy, kpz, kdz).
struct RegressionProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<std::string> column_labels;
    std::vector<double> timestamps;  // one per sample (row triple)

    int sample_count() const { return static_cast<int>(timestamps.size()); }
};

struct IdentOptions {
    bool bias = true;
    double test_fraction = 0.3;
};

struct IdentResult {
    Eigen::VectorXd c;
    std::vector<std::string> labels;
    std::vector<bool> excited;        // per column
    std::vector<double> excitation;   // RMS of each column
    double train_rmse = 0.0;          // N·m
    double test_rmse = 0.0;           // N·m
    double condition_number = 0.0;    // of the excited-column train matrix
};

struct Prediction {
    std::vector<Vec3> values;  // N·m per sample
    double rmse = 0.0;         // N·m
};

/// Net-torque target of one sample: b = I' alpha + omega x (I' omega) with
/// I' = R I R^T, all world frame, about the link CoM.
Vec3 target_vector_sample(const sim::LinkProperties& link, const Mat3& R, const Vec3& omega,
                          const Vec3& alpha);

/// 3 x P block mapping unit coefficients to their net-torque contribution for
/// one sample, mirroring the simulator's wrench bookkeeping exactly:
/// head-joint columns carry the restoring reaction at the link's head attach
/// point, tail-joint columns the transmitted load at the tail follower attach
/// point (lever r2 + measured tail translation). R1 is the previous link's
/// world rotation (head-joint base), R2 the current link's.
Eigen::Matrix<double, 3, Eigen::Dynamic> design_block(const kin::JointStateSample& head,
                                                      const kin::JointStateSample& tail,
                                                      const Mat3& R1, const Mat3& R2,
                                                      const kin::JointGeometry& geom, bool bias);

std::vector<std::string> column_labels(bool bias);

/// Stack all valid samples (timestamp order) into the regression problem.
/// A sample is used only when the joint states and both link motions are
/// valid. Throws std::runtime_error("underdetermined") when fewer than
/// columns/3 valid samples remain.
RegressionProblem assemble(const kin::JointStateSeries& head, const kin::JointStateSeries& tail,
                           const kin::LinkMotionSeries& base_link,
                           const kin::LinkMotionSeries& current_link,
                           const sim::LinkProperties& current_props,
                           const kin::JointGeometry& geom, bool bias);

/// Deterministic contiguous-tail split: the last round(fraction * N) samples
/// form the test set.
std::pair<RegressionProblem, RegressionProblem> split_train_test(const RegressionProblem& p,
                                                                 double test_fraction = 0.3);

/// Minimum-norm least squares via SVD (never the normal equations). Columns
/// with RMS below 1e-12 times the largest are flagged unexcited and their
/// coefficients pinned to zero. Throws std::runtime_error("no excitation")
/// when every column is unexcited.
IdentResult solve(const RegressionProblem& problem);

/// A c per sample plus the RMSE against b (mean over samples and axes).
Prediction predict_net_torque(const RegressionProblem& problem, const Eigen::VectorXd& c);

/// Split a solved coefficient vector back into per-joint spring constants
/// (head first). Bias entries, when present, follow the 24 coefficients.
std::pair<sim::JointCoefficients, sim::JointCoefficients> coefficients_from_vector(
    const Eigen::VectorXd& c);

Eigen::VectorXd vector_from_coefficients(const sim::JointCoefficients& head,
                                         const sim::JointCoefficients& tail, int bias_cols = 0);

struct WrenchRange {
    Vec3 force_min = Vec3::Zero(), force_max = Vec3::Zero();
    Vec3 torque_min = Vec3::Zero(), torque_max = Vec3::Zero();
};

struct ReconstructedWrenches {
    sim::WrenchSeries head, tail;
    WrenchRange head_range, tail_range;
};

/// Joint force/torque series from identified coefficients and measured joint
/// states, with per-channel min/max ranges.
ReconstructedWrenches reconstruct_wrench_series(const Eigen::VectorXd& c,
                                                const kin::JointStateSeries& head,
                                                const kin::JointStateSeries& tail);

}  // namespace jointfit::ident

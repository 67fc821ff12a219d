#include "jointfit/identify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointfit::ident {

namespace {

constexpr int kCoeffCols = 24;
constexpr int kBiasCols = 6;

Vec3 axis_vec(int a) {
    Vec3 e = Vec3::Zero();
    e(a) = 1.0;
    return e;
}

double rmse_of(const Eigen::VectorXd& residual) {
    if (residual.size() == 0) return 0.0;
    return std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
}

}  // namespace

Vec3 target_vector_sample(const sim::LinkProperties& link, const Mat3& R, const Vec3& omega,
                          const Vec3& alpha) {
    const Mat3 Iw = R * link.inertia * R.transpose();
    return Iw * alpha + omega.cross(Iw * omega);
}

std::vector<std::string> column_labels(bool bias) {
    std::vector<std::string> labels;
    const char axes[3] = {'x', 'y', 'z'};
    for (int joint = 1; joint <= 2; ++joint) {
        for (char a : axes) {
            labels.push_back(std::string("kp") + a + std::to_string(joint));
            labels.push_back(std::string("kd") + a + std::to_string(joint));
        }
    }
    for (int joint = 1; joint <= 2; ++joint) {
        for (char a : axes) {
            labels.push_back(std::string("kpt") + a + std::to_string(joint));
            labels.push_back(std::string("kdt") + a + std::to_string(joint));
        }
    }
    if (bias) {
        for (int joint = 1; joint <= 2; ++joint) {
            for (char a : axes) {
                labels.push_back(std::string("bf") + a + std::to_string(joint));
            }
        }
    }
    return labels;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> design_block(const kin::JointStateSample& head,
                                                      const kin::JointStateSample& tail,
                                                      const Mat3& R1, const Mat3& R2,
                                                      const kin::JointGeometry& geom, bool bias) {
    const int cols = kCoeffCols + (bias ? kBiasCols : 0);
    Eigen::Matrix<double, 3, Eigen::Dynamic> B(3, cols);
    B.setZero();

    // Levers from the current link CoM to the wrench application points.
    const Vec3 lever_head = R2 * geom.r1;
    const Vec3 lever_tail = R2 * (geom.r2 + tail.delta);

    // Head joint: restoring reaction on the current link (force -R1 e d).
    for (int a = 0; a < 3; ++a) {
        const Vec3 dir = R1 * axis_vec(a);
        B.col(2 * a + 0) = -lever_head.cross(dir * head.delta(a));
        B.col(2 * a + 1) = -lever_head.cross(dir * head.vel(a));
    }
    // Tail joint: transmitted load on the current link (force +R2 e d).
    for (int a = 0; a < 3; ++a) {
        const Vec3 dir = R2 * axis_vec(a);
        B.col(6 + 2 * a + 0) = lever_tail.cross(dir * tail.delta(a));
        B.col(6 + 2 * a + 1) = lever_tail.cross(dir * tail.vel(a));
    }
    // Pure torques, same sign structure.
    for (int a = 0; a < 3; ++a) {
        const Vec3 dir1 = R1 * axis_vec(a);
        B.col(12 + 2 * a + 0) = -dir1 * head.theta(a);
        B.col(12 + 2 * a + 1) = -dir1 * head.theta_rate(a);
        const Vec3 dir2 = R2 * axis_vec(a);
        B.col(18 + 2 * a + 0) = dir2 * tail.theta(a);
        B.col(18 + 2 * a + 1) = dir2 * tail.theta_rate(a);
    }
    if (bias) {
        // Constant-displacement offsets, one per force axis per joint.
        for (int a = 0; a < 3; ++a) {
            B.col(24 + a) = -lever_head.cross(R1 * axis_vec(a));
            B.col(27 + a) = lever_tail.cross(R2 * axis_vec(a));
        }
    }
    return B;
}

RegressionProblem assemble(const kin::JointStateSeries& head, const kin::JointStateSeries& tail,
                           const kin::LinkMotionSeries& base_link,
                           const kin::LinkMotionSeries& current_link,
                           const sim::LinkProperties& current_props,
                           const kin::JointGeometry& geom, bool bias) {
    const std::size_t n = head.samples.size();
    if (tail.samples.size() != n || base_link.samples.size() != n ||
        current_link.samples.size() != n) {
        throw std::invalid_argument("series lengths differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(head.samples[i].t - tail.samples[i].t) > 1e-9 ||
            std::abs(head.samples[i].t - current_link.samples[i].t) > 1e-9) {
            throw std::invalid_argument("series timestamps differ");
        }
    }

    RegressionProblem p;
    p.column_labels = column_labels(bias);
    const int cols = static_cast<int>(p.column_labels.size());

    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < n; ++i) {
        if (head.samples[i].valid && tail.samples[i].valid && base_link.samples[i].valid &&
            current_link.samples[i].valid) {
            used.push_back(i);
        }
    }
    if (3 * used.size() < static_cast<std::size_t>(cols)) throw std::runtime_error("underdetermined");

    p.A.resize(3 * used.size(), cols);
    p.b.resize(3 * used.size());
    p.timestamps.reserve(used.size());
    for (std::size_t r = 0; r < used.size(); ++r) {
        const std::size_t i = used[r];
        const Mat3 R1 = quat_to_rotmat(base_link.samples[i].q);
        const Mat3 R2 = quat_to_rotmat(current_link.samples[i].q);
        p.A.middleRows(3 * r, 3) =
            design_block(head.samples[i], tail.samples[i], R1, R2, geom, bias);
        p.b.segment(3 * r, 3) = target_vector_sample(current_props, R2, current_link.samples[i].omega,
                                                     current_link.samples[i].alpha);
        if (!p.A.middleRows(3 * r, 3).allFinite() || !p.b.segment(3 * r, 3).allFinite()) {
            throw std::invalid_argument("non-finite regression entry");
        }
        p.timestamps.push_back(head.samples[i].t);
    }
    return p;
}

std::pair<RegressionProblem, RegressionProblem> split_train_test(const RegressionProblem& p,
                                                                 double test_fraction) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw std::invalid_argument("test fraction must lie in (0, 1)");
    }
    const int n = p.sample_count();
    if (n < 2) throw std::invalid_argument("too few samples to split");
    int n_test = static_cast<int>(std::llround(test_fraction * n));
    n_test = std::clamp(n_test, 1, n - 1);
    const int n_train = n - n_test;

    auto slice = [&](int begin, int count) {
        RegressionProblem s;
        s.column_labels = p.column_labels;
        s.A = p.A.middleRows(3 * begin, 3 * count);
        s.b = p.b.segment(3 * begin, 3 * count);
        s.timestamps.assign(p.timestamps.begin() + begin, p.timestamps.begin() + begin + count);
        return s;
    };
    return {slice(0, n_train), slice(n_train, n_test)};
}

IdentResult solve(const RegressionProblem& problem) {
    if (problem.A.rows() == 0) throw std::invalid_argument("empty problem");
    const int cols = static_cast<int>(problem.A.cols());
    const double inv_rows = 1.0 / static_cast<double>(problem.A.rows());

    IdentResult res;
    res.labels = problem.column_labels;
    res.excited.assign(cols, false);
    res.excitation.resize(cols);
    double max_rms = 0.0;
    for (int j = 0; j < cols; ++j) {
        res.excitation[j] = std::sqrt(problem.A.col(j).squaredNorm() * inv_rows);
        max_rms = std::max(max_rms, res.excitation[j]);
    }
    std::vector<int> active;
    for (int j = 0; j < cols; ++j) {
        res.excited[j] = res.excitation[j] > 1e-12 * max_rms && res.excitation[j] > 0.0;
        if (res.excited[j]) active.push_back(j);
    }
    if (active.empty()) throw std::runtime_error("no excitation");

    Eigen::MatrixXd Ae(problem.A.rows(), active.size());
    for (std::size_t k = 0; k < active.size(); ++k) Ae.col(k) = problem.A.col(active[k]);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Ae, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    res.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                   : std::numeric_limits<double>::infinity();
    const Eigen::VectorXd ce = svd.solve(problem.b);

    res.c = Eigen::VectorXd::Zero(cols);
    for (std::size_t k = 0; k < active.size(); ++k) res.c(active[k]) = ce(k);
    res.train_rmse = rmse_of(problem.A * res.c - problem.b);
    return res;
}

Prediction predict_net_torque(const RegressionProblem& problem, const Eigen::VectorXd& c) {
    if (c.size() != problem.A.cols()) throw std::invalid_argument("coefficient dimension mismatch");
    Prediction out;
    const Eigen::VectorXd pred = problem.A * c;
    out.values.resize(problem.sample_count());
    for (int i = 0; i < problem.sample_count(); ++i) out.values[i] = pred.segment(3 * i, 3);
    out.rmse = rmse_of(pred - problem.b);
    return out;
}

std::pair<sim::JointCoefficients, sim::JointCoefficients> coefficients_from_vector(
    const Eigen::VectorXd& c) {
    if (c.size() < kCoeffCols) throw std::invalid_argument("coefficient vector too short");
    sim::JointCoefficients head, tail;
    for (int a = 0; a < 3; ++a) {
        head.kp(a) = c(2 * a);
        head.kd(a) = c(2 * a + 1);
        tail.kp(a) = c(6 + 2 * a);
        tail.kd(a) = c(6 + 2 * a + 1);
        head.kp_rot(a) = c(12 + 2 * a);
        head.kd_rot(a) = c(12 + 2 * a + 1);
        tail.kp_rot(a) = c(18 + 2 * a);
        tail.kd_rot(a) = c(18 + 2 * a + 1);
    }
    return {head, tail};
}

Eigen::VectorXd vector_from_coefficients(const sim::JointCoefficients& head,
                                         const sim::JointCoefficients& tail, int bias_cols) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(kCoeffCols + bias_cols);
    for (int a = 0; a < 3; ++a) {
        c(2 * a) = head.kp(a);
        c(2 * a + 1) = head.kd(a);
        c(6 + 2 * a) = tail.kp(a);
        c(6 + 2 * a + 1) = tail.kd(a);
        c(12 + 2 * a) = head.kp_rot(a);
        c(12 + 2 * a + 1) = head.kd_rot(a);
        c(18 + 2 * a) = tail.kp_rot(a);
        c(18 + 2 * a + 1) = tail.kd_rot(a);
    }
    return c;
}

ReconstructedWrenches reconstruct_wrench_series(const Eigen::VectorXd& c,
                                                const kin::JointStateSeries& head,
                                                const kin::JointStateSeries& tail) {
    const auto [ch, ct] = coefficients_from_vector(c);
    ReconstructedWrenches out;
    out.head.joint_id = head.joint_id;
    out.tail.joint_id = tail.joint_id;

    auto run = [](const kin::JointStateSeries& js, const sim::JointCoefficients& k,
                  sim::WrenchSeries& series, WrenchRange& range) {
        bool first = true;
        for (const auto& s : js.samples) {
            sim::JointRelativeState rs;
            rs.delta = s.delta;
            rs.delta_rate = s.vel;
            rs.theta = s.theta;
            rs.theta_rate = s.theta_rate;
            const sim::JointWrench w = sim::joint_wrench(rs, k);
            series.samples.push_back({s.t, w.force, w.torque});
            if (!s.valid) continue;
            if (first) {
                range.force_min = range.force_max = w.force;
                range.torque_min = range.torque_max = w.torque;
                first = false;
            } else {
                range.force_min = range.force_min.cwiseMin(w.force);
                range.force_max = range.force_max.cwiseMax(w.force);
                range.torque_min = range.torque_min.cwiseMin(w.torque);
                range.torque_max = range.torque_max.cwiseMax(w.torque);
            }
        }
    };
    run(head, ch, out.head, out.head_range);
    run(tail, ct, out.tail, out.tail_range);
    return out;
}

}  // namespace jointfit::ident

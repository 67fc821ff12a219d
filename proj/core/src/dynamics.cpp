#include "jointfit/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace jointfit::sim {

namespace {

// Joint attachment geometry in world coordinates. For joint j the base side
// is link j-1 (or the world anchor for j = 0) and the follower is link j.
struct JointFrames {
    Mat3 R_joint;   // joint base frame: R_base * neutral_rotation
    Vec3 p_base;    // base-side attach point
    Vec3 p_fol;     // follower-side attach point
    Vec3 v_base;    // attach point velocities (world)
    Vec3 v_fol;
    Vec3 w_base;    // base link angular velocity (world)
    Vec3 w_fol;
    Mat3 R_fol;
};

JointFrames joint_frames(const ChainModel& model, const SimState& state, int joint) {
    JointFrames f;
    const LinkState& fol = state[joint];
    f.R_fol = quat_to_rotmat(fol.q);
    f.p_fol = fol.p + f.R_fol * model.links[joint].r1;
    f.v_fol = fol.v + fol.w.cross(f.R_fol * model.links[joint].r1);
    f.w_fol = fol.w;

    const Mat3 R_neutral = quat_to_rotmat(model.joints[joint].neutral_rotation);
    if (joint == 0) {
        f.R_joint = R_neutral;
        f.p_base = model.anchor_point;
        f.v_base = Vec3::Zero();
        f.w_base = Vec3::Zero();
    } else {
        const LinkState& base = state[joint - 1];
        const Mat3 R_base = quat_to_rotmat(base.q);
        f.R_joint = R_base * R_neutral;
        f.p_base = base.p + R_base * model.links[joint - 1].r2;
        f.v_base = base.v + base.w.cross(R_base * model.links[joint - 1].r2);
        f.w_base = base.w;
    }
    return f;
}

JointRelativeState relative_state_from_frames(const ChainModel& model, const JointFrames& f,
                                              int joint) {
    JointRelativeState rs;
    const Vec3 u = f.p_fol - f.p_base;
    rs.delta = f.R_joint.transpose() * u - model.joints[joint].neutral_translation;
    // Rate of the base-frame components, matching what differentiating the
    // measured delta series yields.
    rs.delta_rate = f.R_joint.transpose() * (f.v_fol - f.v_base - f.w_base.cross(u));
    const Mat3 R_dev = f.R_joint.transpose() * f.R_fol;
    rs.theta = quat_to_euler_zyx(rotmat_to_quat(R_dev)).axis_angles();
    rs.theta_rate = f.R_joint.transpose() * (f.w_fol - f.w_base);
    return rs;
}

struct LinkDeriv {
    Vec3 dp, dv, dw;
    Quat dq;
};

std::vector<LinkDeriv> chain_rhs(const ChainModel& model, const SimState& state) {
    const int n = static_cast<int>(model.links.size());
    std::vector<LinkDeriv> d(n);
    for (int i = 0; i < n; ++i) {
        const NetWrench nw = net_wrench_on_link(model, state, i);
        const LinkState& s = state[i];
        const Mat3 R = quat_to_rotmat(s.q);
        const Mat3 Iw = R * model.links[i].inertia * R.transpose();
        d[i].dp = s.v;
        d[i].dv = nw.force / model.links[i].mass;
        d[i].dq = 0.5 * (Quat(0, s.w.x(), s.w.y(), s.w.z()) * s.q);
        d[i].dw = gyroscopic_rhs(Iw, s.w, nw.torque);
    }
    return d;
}

SimState advance(const SimState& s, const std::vector<LinkDeriv>& d, double h) {
    SimState out = s;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i].p = s[i].p + h * d[i].dp;
        out[i].v = s[i].v + h * d[i].dv;
        out[i].q = s[i].q + h * d[i].dq;
        out[i].w = s[i].w + h * d[i].dw;
    }
    return out;
}

bool state_finite(const SimState& s) {
    for (const auto& l : s) {
        if (!l.p.allFinite() || !l.v.allFinite() || !l.w.allFinite()) return false;
        if (!std::isfinite(l.q.w) || !std::isfinite(l.q.x) || !std::isfinite(l.q.y) ||
            !std::isfinite(l.q.z)) {
            return false;
        }
    }
    return true;
}

double state_max_abs(const SimState& s) {
    double m = 0.0;
    for (const auto& l : s) {
        m = std::max({m, l.p.cwiseAbs().maxCoeff(), l.v.cwiseAbs().maxCoeff(),
                      l.w.cwiseAbs().maxCoeff(), std::abs(l.q.w), std::abs(l.q.x),
                      std::abs(l.q.y), std::abs(l.q.z)});
    }
    return m;
}

double state_diff(const SimState& a, const SimState& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max({m, (a[i].p - b[i].p).cwiseAbs().maxCoeff(),
                      (a[i].v - b[i].v).cwiseAbs().maxCoeff(),
                      (a[i].w - b[i].w).cwiseAbs().maxCoeff()});
        const Quat dq = a[i].q - b[i].q;
        m = std::max({m, std::abs(dq.w), std::abs(dq.x), std::abs(dq.y), std::abs(dq.z)});
    }
    return m;
}

}  // namespace

void ChainModel::validate() const {
    if (links.empty()) throw std::invalid_argument("chain needs at least one link");
    if (joints.size() != links.size()) {
        throw std::invalid_argument("chain needs one joint per link (anchor joint first)");
    }
    for (const auto& l : links) {
        if (!(l.mass > 0.0)) throw std::invalid_argument("link mass must be positive");
        if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("inertia tensor must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia);
        const Vec3 ev = es.eigenvalues();
        if (!(ev.minCoeff() > 0.0)) throw std::invalid_argument("inertia tensor must be positive definite");
        // Triangle inequalities of the principal moments.
        if (ev(0) + ev(1) < ev(2) - 1e-12) {
            throw std::invalid_argument("inertia principal moments violate triangle inequality");
        }
        if (l.r1.norm() >= 10.0 || l.r2.norm() >= 10.0) {
            throw std::invalid_argument("joint offsets exceed sanity bound");
        }
    }
    for (const auto& j : joints) {
        if (std::abs(j.neutral_rotation.norm() - 1.0) > 1e-6) {
            throw std::invalid_argument("neutral rotation must be a unit quaternion");
        }
    }
}

JointWrench joint_wrench(const JointRelativeState& state, const JointCoefficients& coeffs) {
    JointWrench w;
    w.force = coeffs.kp.cwiseProduct(state.delta) + coeffs.kd.cwiseProduct(state.delta_rate);
    w.torque = coeffs.kp_rot.cwiseProduct(state.theta) + coeffs.kd_rot.cwiseProduct(state.theta_rate);
    return w;
}

Vec3 gyroscopic_rhs(const Mat3& Iw, const Vec3& w, const Vec3& tau_net) {
    return Iw.ldlt().solve(tau_net - w.cross(Iw * w));
}

JointRelativeState joint_relative_state(const ChainModel& model, const SimState& state, int joint) {
    return relative_state_from_frames(model, joint_frames(model, state, joint), joint);
}

NetWrench net_wrench_on_link(const ChainModel& model, const SimState& state, int link) {
    NetWrench nw;
    const LinkState& s = state[link];
    nw.force = model.links[link].mass * model.gravity;

    // Head joint: this link is the follower and receives the restoring
    // reaction at its own head attach point.
    {
        const JointFrames f = joint_frames(model, state, link);
        const JointRelativeState rs = relative_state_from_frames(model, f, link);
        const JointWrench jw = joint_wrench(rs, model.joints[link].coeffs);
        const Vec3 Fw = f.R_joint * jw.force;
        const Vec3 Tw = f.R_joint * jw.torque;
        nw.force -= Fw;
        nw.torque -= (f.p_fol - s.p).cross(Fw) + Tw;
    }

    // Tail joint: this link is the base and carries the transmitted load,
    // applied at the follower-side attach point (action and reaction share
    // the application point, so the joint transmits zero net wrench).
    if (link + 1 < static_cast<int>(model.links.size())) {
        const JointFrames f = joint_frames(model, state, link + 1);
        const JointRelativeState rs = relative_state_from_frames(model, f, link + 1);
        const JointWrench jw = joint_wrench(rs, model.joints[link + 1].coeffs);
        const Vec3 Fw = f.R_joint * jw.force;
        const Vec3 Tw = f.R_joint * jw.torque;
        nw.force += Fw;
        nw.torque += (f.p_fol - s.p).cross(Fw) + Tw;
    }
    return nw;
}

SimState step(const SimState& state, const ChainModel& model, double dt) {
    const auto k1 = chain_rhs(model, state);
    const auto k2 = chain_rhs(model, advance(state, k1, dt / 2));
    const auto k3 = chain_rhs(model, advance(state, k2, dt / 2));
    const auto k4 = chain_rhs(model, advance(state, k3, dt));

    SimState out = state;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double h = dt / 6.0;
        out[i].p += h * (k1[i].dp + 2 * k2[i].dp + 2 * k3[i].dp + k4[i].dp);
        out[i].v += h * (k1[i].dv + 2 * k2[i].dv + 2 * k3[i].dv + k4[i].dv);
        out[i].q = out[i].q + h * (k1[i].dq + 2 * k2[i].dq + 2 * k3[i].dq + k4[i].dq);
        out[i].w += h * (k1[i].dw + 2 * k2[i].dw + 2 * k3[i].dw + k4[i].dw);
        out[i].q = out[i].q.normalized();
    }
    return out;
}

SimState neutral_state(const ChainModel& model) {
    SimState state(model.links.size());
    Mat3 R_prev = Mat3::Identity();
    Vec3 attach = model.anchor_point;
    for (std::size_t i = 0; i < model.links.size(); ++i) {
        const Mat3 R_joint = R_prev * quat_to_rotmat(model.joints[i].neutral_rotation);
        const Vec3 p_fol = attach + R_joint * model.joints[i].neutral_translation;
        state[i].q = rotmat_to_quat(R_joint);
        state[i].p = p_fol - R_joint * model.links[i].r1;
        R_prev = R_joint;
        attach = state[i].p + R_joint * model.links[i].r2;
    }
    return state;
}

double recommended_step_rate(const ChainModel& model) {
    double w_max = 0.0;
    for (std::size_t j = 0; j < model.joints.size(); ++j) {
        const auto& c = model.joints[j].coeffs;
        const double m_fol = model.links[j].mass;
        const double m_base = (j == 0) ? std::numeric_limits<double>::infinity()
                                       : model.links[j - 1].mass;
        const double mu = 1.0 / (1.0 / m_fol + 1.0 / m_base);
        Eigen::SelfAdjointEigenSolver<Mat3> es(model.links[j].inertia);
        const double i_min = es.eigenvalues().minCoeff();
        for (int a = 0; a < 3; ++a) {
            if (c.kp(a) > 0) w_max = std::max(w_max, std::sqrt(c.kp(a) / mu));
            if (c.kp_rot(a) > 0) w_max = std::max(w_max, std::sqrt(c.kp_rot(a) / i_min));
        }
    }
    return 10.0 * w_max;
}

SimOutput simulate(const ChainModel& model_in, const SimConfig& config, double duration,
                   const SimState& initial) {
    model_in.validate();
    if (!(config.dt_output > 0.0) || config.substeps < 1) {
        throw std::invalid_argument("invalid simulation config");
    }
    ChainModel model = model_in;

    SimOutput out;
    for (std::size_t j = 0; j < model.joints.size(); ++j) {
        if (model.joints[j].coeffs.any_negative()) {
            out.warnings.push_back("joint '" + model.joints[j].name +
                                   "' has negative coefficients");
        }
    }
    const double rec_rate = recommended_step_rate(model);
    if (rec_rate * config.dt_output > config.substeps) {
        out.warnings.push_back("substeps below stability recommendation (" +
                               std::to_string(static_cast<int>(std::ceil(rec_rate * config.dt_output))) +
                               " per output sample)");
    }

    if (model.neutral_from_initial) {
        // Re-seed every joint's neutral pose from the initial relative pose.
        for (std::size_t j = 0; j < model.joints.size(); ++j) {
            const Mat3 R_base = (j == 0) ? Mat3::Identity() : quat_to_rotmat(initial[j - 1].q);
            const Vec3 p_base = (j == 0) ? model.anchor_point
                                         : initial[j - 1].p + R_base * model.links[j - 1].r2;
            const Mat3 R_fol = quat_to_rotmat(initial[j].q);
            const Vec3 p_fol = initial[j].p + R_fol * model.links[j].r1;
            model.joints[j].neutral_rotation = rotmat_to_quat(R_base.transpose() * R_fol);
            model.joints[j].neutral_translation = R_fol.transpose() * (p_fol - p_base);
        }
    }

    const int n_links = static_cast<int>(model.links.size());
    const int n_samples = std::max(1, static_cast<int>(std::llround(duration / config.dt_output)));
    const double dt_int = config.dt_output / config.substeps;

    out.poses.resize(n_links);
    out.link_motion.resize(n_links);
    for (int i = 0; i < n_links; ++i) {
        const std::string name = (i < static_cast<int>(model.link_names.size()))
                                     ? model.link_names[i]
                                     : "link" + std::to_string(i + 1);
        out.poses[i].body_id = name;
        out.link_motion[i].body_id = name;
        out.link_motion[i].sample_rate = 1.0 / config.dt_output;
    }
    out.joint_states.resize(model.joints.size());
    out.wrenches.resize(model.joints.size());
    for (std::size_t j = 0; j < model.joints.size(); ++j) {
        out.joint_states[j].joint_id = model.joints[j].name;
        out.joint_states[j].sample_rate = 1.0 / config.dt_output;
        out.wrenches[j].joint_id = model.joints[j].name;
    }

    SimState state = initial;
    long internal_step = 0;
    for (int k = 0; k < n_samples; ++k) {
        const double t = k * config.dt_output;

        // Ground truth from the internal state.
        const auto rhs = chain_rhs(model, state);
        for (int i = 0; i < n_links; ++i) {
            out.poses[i].samples.push_back({t, state[i].p, state[i].q});
            kin::LinkMotionSample ms;
            ms.t = t;
            ms.q = state[i].q;
            ms.omega = state[i].w;
            ms.alpha = rhs[i].dw;
            out.link_motion[i].samples.push_back(ms);
        }
        for (std::size_t j = 0; j < model.joints.size(); ++j) {
            const JointRelativeState rs = joint_relative_state(model, state, static_cast<int>(j));
            kin::JointStateSample js;
            js.t = t;
            js.delta = rs.delta;
            js.vel = rs.delta_rate;
            js.theta = rs.theta;
            js.theta_rate = rs.theta_rate;
            out.joint_states[j].samples.push_back(js);
            const JointWrench jw = joint_wrench(rs, model.joints[j].coeffs);
            out.wrenches[j].samples.push_back({t, jw.force, jw.torque});
        }

        if (k + 1 == n_samples) break;

        SimState shadow;
        if (config.step_doubling_check) shadow = state;
        for (int s = 0; s < config.substeps; ++s) {
            state = step(state, model, dt_int);
            ++internal_step;
            if (!state_finite(state)) {
                throw SimDivergedError(internal_step, "simulation diverged at internal step " +
                                                          std::to_string(internal_step));
            }
        }
        if (config.step_doubling_check) {
            for (int s = 0; s < 2 * config.substeps; ++s) {
                shadow = step(shadow, model, dt_int / 2);
            }
            const double err = state_diff(state, shadow);
            if (err > config.rel_tol * state_max_abs(state) + config.abs_tol) {
                ++out.tolerance_exceedances;
            }
        }
    }

    for (auto& p : out.poses) p.validate();
    return out;
}

}  // namespace jointfit::sim

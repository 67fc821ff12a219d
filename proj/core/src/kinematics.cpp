#include "jointfit/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace jointfit::kin {

namespace {

signal::SampledSeries make_series(double rate, double t0, std::vector<double> values) {
    signal::SampledSeries s;
    s.sample_rate = rate;
    s.t0 = t0;
    s.values = std::move(values);
    return s;
}

void check_aligned(const BodyTrajectory& a, const BodyTrajectory& b) {
    if (a.samples.size() != b.samples.size()) throw std::invalid_argument("unaligned trajectories");
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9) {
            throw std::invalid_argument("unaligned trajectories");
        }
    }
}

// Filter a quaternion channel set component-wise, then renormalize per sample.
std::vector<Quat> filter_quat_series(const std::vector<Quat>& qs, double rate, double t0,
                                     std::optional<double> cutoff) {
    if (!cutoff) return qs;
    std::array<std::vector<double>, 4> ch;
    for (auto& c : ch) c.reserve(qs.size());
    for (const Quat& q : qs) {
        ch[0].push_back(q.w);
        ch[1].push_back(q.x);
        ch[2].push_back(q.y);
        ch[3].push_back(q.z);
    }
    for (auto& c : ch) {
        c = signal::lowpass_zero_phase(make_series(rate, t0, std::move(c)), *cutoff).values;
    }
    std::vector<Quat> out(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        out[i] = Quat(ch[0][i], ch[1][i], ch[2][i], ch[3][i]).normalized();
    }
    return out;
}

std::vector<double> filter_channel(std::vector<double> v, double rate, double t0,
                                   std::optional<double> cutoff) {
    if (!cutoff) return v;
    return signal::lowpass_zero_phase(make_series(rate, t0, std::move(v)), *cutoff).values;
}

// Unwrap +-2*pi jumps before differentiating Euler channels.
void unwrap_angles(std::vector<double>& a) {
    constexpr double pi = 3.14159265358979323846;
    double offset = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double prev = a[i - 1];
        double cur = a[i] + offset;
        while (cur - prev > pi) {
            cur -= 2 * pi;
            offset -= 2 * pi;
        }
        while (cur - prev < -pi) {
            cur += 2 * pi;
            offset += 2 * pi;
        }
        a[i] = cur;
    }
}

}  // namespace

void BodyTrajectory::validate() {
    if (samples.size() < 2) {
        for (auto& s : samples) s.q = s.q.normalized();
        return;
    }
    const double dt0 = samples[1].t - samples[0].t;
    if (dt0 <= 0.0) throw std::invalid_argument("timestamps must be strictly increasing");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double dt = samples[i].t - samples[i - 1].t;
        if (dt <= 0.0) throw std::invalid_argument("timestamps must be strictly increasing");
        if (std::abs(dt - dt0) > 1e-9) throw std::invalid_argument("non-uniform sample interval");
    }
    for (auto& s : samples) s.q = s.q.normalized();
}

double BodyTrajectory::sample_rate() const {
    if (samples.size() < 2) return 0.0;
    return 1.0 / (samples[1].t - samples[0].t);
}

FramePose frame_from_markers(const std::array<Vec3, 3>& markers) {
    const Vec3 u = markers[1] - markers[0];
    const Vec3 v = markers[2] - markers[0];
    if (0.5 * u.cross(v).norm() <= 1e-8) throw std::domain_error("degenerate marker set");

    const Vec3 x = u.normalized();
    const Vec3 z = u.cross(v).normalized();
    const Vec3 y = z.cross(x);
    Mat3 axes;
    axes.col(0) = x;
    axes.col(1) = y;
    axes.col(2) = z;
    FramePose fp;
    fp.p = markers[0];
    fp.R = nearest_orthonormal(axes);
    return fp;
}

Mat3 relative_rotation(const Mat3& R1, const Mat3& R2) {
    return R1.transpose() * R2;
}

Vec3 relative_translation(const Vec3& x1, const Vec3& x2, const Mat3& R1, const Mat3& R2,
                          const Vec3& r1_alg, const Vec3& r2_alg) {
    const Vec3 X = x1 - x2;
    const Vec3 X_img = -R1 * r1_alg - R2 * r2_alg;
    return R1.transpose() * (X_img - X);
}

void make_sign_continuous(std::vector<Quat>& qs) {
    for (std::size_t i = 1; i < qs.size(); ++i) {
        if (qs[i].dot(qs[i - 1]) < 0.0) qs[i] = -1.0 * qs[i];
    }
}

JointStateSeries joint_state_series(const BodyTrajectory& base, const BodyTrajectory& follower,
                                    const JointGeometry& geom, const FilteringConfig& cfg) {
    check_aligned(base, follower);
    const std::size_t n = base.samples.size();
    if (n < static_cast<std::size_t>(cfg.window)) {
        throw std::invalid_argument("trajectory shorter than differentiation window");
    }
    const double rate = base.sample_rate();
    const double t0 = base.samples.front().t;

    // Raw relative channels.
    std::vector<Quat> qrel(n);
    std::array<std::vector<double>, 3> dch;
    for (auto& c : dch) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sb = base.samples[i];
        const auto& sf = follower.samples[i];
        qrel[i] = sb.q.conj() * sf.q;
        const Vec3 d = relative_translation(sb.p, sf.p, quat_to_rotmat(sb.q),
                                            quat_to_rotmat(sf.q), geom.r1_alg, geom.r2_alg);
        for (int a = 0; a < 3; ++a) dch[a][i] = d(a);
    }
    make_sign_continuous(qrel);

    for (auto& c : dch) c = filter_channel(std::move(c), rate, t0, cfg.cutoff_hz);
    qrel = filter_quat_series(qrel, rate, t0, cfg.cutoff_hz);

    // Translation rates.
    std::array<signal::SampledSeries, 3> dvel;
    for (int a = 0; a < 3; ++a) {
        dvel[a] = signal::sliding_window_derivatives(make_series(rate, t0, dch[a]),
                                                     cfg.window, cfg.degree).d1;
    }

    // Relative quaternion rates.
    std::array<std::vector<double>, 4> qch;
    for (auto& c : qch) c.reserve(n);
    for (const Quat& q : qrel) {
        qch[0].push_back(q.w);
        qch[1].push_back(q.x);
        qch[2].push_back(q.y);
        qch[3].push_back(q.z);
    }
    std::array<signal::SampledSeries, 4> qd;
    for (int a = 0; a < 4; ++a) {
        qd[a] = signal::sliding_window_derivatives(make_series(rate, t0, qch[a]),
                                                   cfg.window, cfg.degree).d1;
    }

    // Euler channels (for output; optionally for rates).
    std::array<std::vector<double>, 3> th;
    for (auto& c : th) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 e = quat_to_euler_zyx(qrel[i]).axis_angles();
        for (int a = 0; a < 3; ++a) th[a][i] = e(a);
    }

    std::array<std::vector<double>, 3> th_rate;
    if (cfg.theta_rate_mode == ThetaRateMode::kEulerDerivative) {
        for (int a = 0; a < 3; ++a) {
            auto c = th[a];
            unwrap_angles(c);
            th_rate[a] = signal::sliding_window_derivatives(make_series(rate, t0, std::move(c)),
                                                            cfg.window, cfg.degree).d1.values;
        }
    }

    const int half = cfg.window / 2;
    JointStateSeries out;
    out.sample_rate = rate;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        JointStateSample& s = out.samples[i];
        s.t = base.samples[i].t;
        s.delta = Vec3(dch[0][i], dch[1][i], dch[2][i]);
        s.vel = Vec3(dvel[0].values[i], dvel[1].values[i], dvel[2].values[i]);
        s.theta = Vec3(th[0][i], th[1][i], th[2][i]);
        if (cfg.theta_rate_mode == ThetaRateMode::kEulerDerivative) {
            s.theta_rate = Vec3(th_rate[0][i], th_rate[1][i], th_rate[2][i]);
        } else {
            const Quat qdot(qd[0].values[i], qd[1].values[i], qd[2].values[i], qd[3].values[i]);
            s.theta_rate = angular_velocity_from_quat(qrel[i], qdot).value;
        }
        s.valid = (i >= static_cast<std::size_t>(half)) && (i + half < n);
    }
    return out;
}

LinkMotionSeries link_motion_series(const BodyTrajectory& traj, const FilteringConfig& cfg) {
    const std::size_t n = traj.samples.size();
    if (n < static_cast<std::size_t>(cfg.window)) {
        throw std::invalid_argument("trajectory shorter than differentiation window");
    }
    const double rate = traj.sample_rate();
    const double t0 = traj.samples.front().t;

    std::vector<Quat> qs(n);
    for (std::size_t i = 0; i < n; ++i) qs[i] = traj.samples[i].q;
    make_sign_continuous(qs);
    qs = filter_quat_series(qs, rate, t0, cfg.cutoff_hz);

    std::array<std::vector<double>, 4> qch;
    for (auto& c : qch) c.reserve(n);
    for (const Quat& q : qs) {
        qch[0].push_back(q.w);
        qch[1].push_back(q.x);
        qch[2].push_back(q.y);
        qch[3].push_back(q.z);
    }
    std::array<signal::DerivativePair, 4> qd;
    for (int a = 0; a < 4; ++a) {
        qd[a] = signal::sliding_window_derivatives(make_series(rate, t0, qch[a]),
                                                   cfg.window, cfg.degree);
    }

    const int half = cfg.window / 2;
    LinkMotionSeries out;
    out.body_id = traj.body_id;
    out.sample_rate = rate;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        LinkMotionSample& s = out.samples[i];
        s.t = traj.samples[i].t;
        s.q = qs[i];
        const Quat qdot(qd[0].d1.values[i], qd[1].d1.values[i], qd[2].d1.values[i], qd[3].d1.values[i]);
        const Quat qddot(qd[0].d2.values[i], qd[1].d2.values[i], qd[2].d2.values[i], qd[3].d2.values[i]);
        s.omega = angular_velocity_from_quat(qs[i], qdot).value;
        s.alpha = angular_acceleration_from_quat(qs[i], qdot, qddot).value;
        s.valid = (i >= static_cast<std::size_t>(half)) && (i + half < n);
    }
    return out;
}

}  // namespace jointfit::kin

#include "tactor/mechanism.hpp"

#include "tactor/config.hpp"

#include <cassert>

namespace tactor {

double wrap_angle(double rad) {
    double a = std::remainder(rad, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

MechanismParams MechanismParams::defaults() {
    MechanismParams p;
    p.L = 17.5;
    p.l = 15.0;
    p.d1 = 12.15;
    p.h1 = 4.97;
    p.d = 7.5;
    p.h = 17.5;
    // Base joint placement and q limits are not part of the published link
    // table; these values reproduce the reference workspace and force numbers
    // (see README, "Default configuration").
    p.base_radius = 18.0;
    p.base_z = 0.0;
    p.phi = {kPi / 4.0, 3.0 * kPi / 4.0, 5.0 * kPi / 4.0, 7.0 * kPi / 4.0};
    p.q_min = deg2rad(28.0);
    p.q_max = deg2rad(78.0);
    // Calibrated so the +z force capacity at home is 1.39 N.
    p.tau_max = 8.760723436762385;
    p.home_z = -21.0;
    return p;
}

void MechanismParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be a positive finite length");
        }
    };
    positive(L, "L");
    positive(l, "l");
    positive(d1, "d1");
    positive(h1, "h1");
    positive(d, "d");
    positive(h, "h");
    if (!(base_radius >= 0.0) || !std::isfinite(base_radius)) {
        throw ConfigError("base_radius must be a non-negative finite length");
    }
    if (!std::isfinite(base_z)) {
        throw ConfigError("base_z must be finite");
    }
    if (!(q_min < q_max)) {
        throw ConfigError("q_limits must satisfy q_min < q_max");
    }
    if (!std::isfinite(q_min) || !std::isfinite(q_max)) {
        throw ConfigError("q_limits must be finite");
    }
    positive(tau_max, "tau_max");
}

Vec3 db_vector(const MechanismParams& p, int leg, double theta) {
    assert(leg >= 0 && leg < 4);
    const double hs = 0.5 * p.h * std::sin(theta);
    const double hc = 0.5 * p.h * std::cos(theta);
    const double dx = p.d1 + 0.5 * p.d;
    switch (leg) {
        case 0: return {-hs + dx, hc + p.h1, 0.0};
        case 1: return {-hs - dx, hc + p.h1, 0.0};
        case 2: return {hs - dx, -hc - p.h1, 0.0};
        default: return {hs + dx, -hc - p.h1, 0.0};
    }
}

Vec3 db_vector_dtheta(const MechanismParams& p, int leg, double theta) {
    assert(leg >= 0 && leg < 4);
    const double hs = 0.5 * p.h * std::sin(theta);
    const double hc = 0.5 * p.h * std::cos(theta);
    if (leg < 2) return {-hc, -hs, 0.0};
    return {hc, hs, 0.0};
}

Vec3 base_point(const MechanismParams& p, int leg) {
    assert(leg >= 0 && leg < 4);
    return {p.base_radius * std::cos(p.phi[leg]), p.base_radius * std::sin(p.phi[leg]), p.base_z};
}

Vec3 upper_link_vector(const MechanismParams& p, int leg, double q) {
    assert(leg >= 0 && leg < 4);
    const double cq = std::cos(q);
    return {p.L * std::cos(p.phi[leg]) * cq, p.L * std::sin(p.phi[leg]) * cq, -p.L * std::sin(q)};
}

Vec3 upper_link_vector_dq(const MechanismParams& p, int leg, double q) {
    assert(leg >= 0 && leg < 4);
    const double sq = std::sin(q);
    return {-p.L * std::cos(p.phi[leg]) * sq, -p.L * std::sin(p.phi[leg]) * sq, -p.L * std::cos(q)};
}

double leg_residual(const MechanismParams& p, const Pose& pose, int leg, double q_i) {
    const Vec3 g = pose.translation() + db_vector(p, leg, pose.theta) - base_point(p, leg) -
                   upper_link_vector(p, leg, q_i);
    return g.squaredNorm() - p.l * p.l;
}

Vec4 constraint_residual(const MechanismParams& p, const Pose& pose, const JointAngles& q) {
    Vec4 r;
    for (int i = 0; i < 4; ++i) r[i] = leg_residual(p, pose, i, q.q[i]);
    return r;
}

}  // namespace tactor

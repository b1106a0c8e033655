#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace tactor {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

/// Task-space coordinate of the tactor. Translation in mm, twist about z in rad.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double theta = 0.0;

    Vec3 translation() const { return {x, y, z}; }
};

/// Actuated joint angles (rad), one per leg, plus the branch sign each root
/// was taken from (the sign of the square root in the tan-half-angle formula).
struct JointAngles {
    std::array<double, 4> q{};
    std::array<int, 4> branch{};
};

/// Geometric description of the four-legged parallel mechanism.
/// Lengths in mm, angles in rad, torques in N.mm.
struct MechanismParams {
    double L = 0.0;            ///< upper-link length, shared by all legs
    double l = 0.0;            ///< parallelogram (lower-link) length
    double d1 = 0.0;           ///< traveling-plate half-offset along x
    double h1 = 0.0;           ///< traveling-plate half-offset along y
    double d = 0.0;            ///< tactor-bar offset
    double h = 0.0;            ///< tactor-bar length
    double base_radius = 0.0;  ///< radial distance from origin to each actuated joint P_i
    double base_z = 0.0;       ///< height of P_i above the base plane
    std::array<double, 4> phi{};  ///< leg azimuths; pi/4, 3pi/4, 5pi/4, 7pi/4
    double q_min = 0.0;        ///< actuated-angle lower limit, all legs
    double q_max = 0.0;        ///< actuated-angle upper limit, all legs
    double tau_max = 0.0;      ///< per-motor torque limit referred to the joint
    double home_z = 0.0;       ///< nominal operating depth of the centred pose

    /// Built-in configuration of the reference device. tau_max is calibrated
    /// so the +z force capacity at home() is 1.39 N.
    static MechanismParams defaults();

    /// Throws ConfigError on non-physical values (see config.hpp).
    void validate() const;

    Pose home() const { return Pose{0.0, 0.0, home_z, 0.0}; }
};

/// Plate attachment vector DB_i as a function of the twist angle. z-component
/// is identically zero; legs 1<->3 and 2<->4 are point-symmetric.
Vec3 db_vector(const MechanismParams& p, int leg, double theta);

/// d(DB_i)/d(theta).
Vec3 db_vector_dtheta(const MechanismParams& p, int leg, double theta);

/// Actuated joint centre P_i = (base_radius cos phi_i, base_radius sin phi_i, base_z).
Vec3 base_point(const MechanismParams& p, int leg);

/// Upper-link vector P_iA_i; magnitude is L for every q.
Vec3 upper_link_vector(const MechanismParams& p, int leg, double q);

/// d(P_iA_i)/dq.
Vec3 upper_link_vector_dq(const MechanismParams& p, int leg, double q);

/// Loop-closure residual of one leg: ||B_i - A_i||^2 - l^2, in mm^2.
double leg_residual(const MechanismParams& p, const Pose& pose, int leg, double q_i);

/// All four loop-closure residuals. Zero iff the pose/joint pair is consistent.
Vec4 constraint_residual(const MechanismParams& p, const Pose& pose, const JointAngles& q);

}  // namespace tactor

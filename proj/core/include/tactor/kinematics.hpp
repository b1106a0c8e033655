#pragma once

#include "tactor/mechanism.hpp"

#include <optional>
#include <string>

namespace tactor {

enum class SolveStatus {
    Ok,
    Infeasible,               ///< some leg discriminant < 0
    JointLimit,               ///< a root exists but violates q_limits
    Singular,                 ///< no finite tan-half-angle root
    NoConvergence,            ///< Newton refinement stalled
    NoRealRoot,               ///< no twist root closed all four legs
    DegenerateLinearSystem,   ///< positional system singular at every candidate twist
    SingularConfiguration,    ///< velocity Jacobian not invertible
    FreeDirection,            ///< wrench direction in the Jacobian-transpose null space
};

const char* to_string(SolveStatus s);

/// Coefficients of the per-leg closure equation I sin q + J cos q + K = 0, mm^2.
struct IJKCoefficients {
    double I = 0.0;
    double J = 0.0;
    double K = 0.0;
};

/// shifted = (x,y,z) + DB_i - P_i for the leg in question.
IJKCoefficients ijk_coefficients(const MechanismParams& p, int leg, const Vec3& shifted);

/// Real roots of the closure equation for one leg. Up to two; branch holds
/// the sign of the discriminant square root each root came from.
struct LegRoots {
    int count = 0;
    std::array<double, 2> q{};
    std::array<int, 2> branch{};
    double discriminant = 0.0;   ///< I^2 + J^2 - K^2, mm^4
    bool singular = false;       ///< leading tan-half-angle coefficient vanished
};

LegRoots leg_closure_roots(const MechanismParams& p, int leg, const Pose& pose);

struct IkSolution {
    JointAngles joints;
    bool feasible = false;
    Vec4 discriminants = Vec4::Zero();  ///< mm^4
    SolveStatus status = SolveStatus::Ok;
};

/// Closed-form inverse kinematics. Default branch selection takes the root
/// with smaller |q| per leg (ties toward the negative branch); with a hint,
/// the per-leg root nearest the hint. feasible is true iff every discriminant
/// is non-negative and every selected root lies within q limits.
IkSolution inverse_kinematics(const MechanismParams& p, const Pose& pose,
                              const JointAngles* branch_hint = nullptr);

enum class FkMethod { Iterative, Direct };

struct FkResult {
    Pose pose;
    double residual_norm = 0.0;  ///< max |r_i| over the four legs, mm^2
    FkMethod method = FkMethod::Direct;
    SolveStatus status = SolveStatus::Ok;
};

/// One Jacobian-integration step from (q_prev, pose_prev) to q_now, followed
/// by Newton refinement of the four closure residuals.
FkResult forward_kinematics_iterative(const MechanismParams& p, const JointAngles& q_prev,
                                      const JointAngles& q_now, const Pose& pose_prev, double dt);

/// Direct forward kinematics: for candidate twists the three leg-difference
/// equations are linear in (x,y,z) and solved by Cramer's rule; the remaining
/// scalar closure is root-found over theta in (-pi, pi]. Among consistent
/// roots the one nearest theta_hint (default 0) wins.
FkResult forward_kinematics_direct(const MechanismParams& p, const JointAngles& q,
                                   std::optional<double> theta_hint = std::nullopt);

struct JacobianResult {
    Mat4 J = Mat4::Zero();   ///< task velocity (xdot, ydot, zdot, thetadot) per qdot
    SolveStatus status = SolveStatus::Ok;
};

/// Task-space Jacobian from implicit differentiation of the closure residuals:
/// A pdot = B qdot with A = dr/dp and B = -dr/dq.
JacobianResult jacobian(const MechanismParams& p, const Pose& pose, const JointAngles& q);

}  // namespace tactor

#include "tactor/kinematics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tactor {

namespace {

constexpr double kClosureTol = 1e-9;     // mm^2
constexpr int kNewtonMaxIter = 50;
constexpr int kThetaGridSize = 721;      // nodes over (-pi, pi]
constexpr int kBisectIter = 60;
constexpr double kDetRelTol = 1e-10;     // Cramer degeneracy, relative to Hadamard bound

double max_abs_residual(const MechanismParams& p, const Pose& pose, const JointAngles& q) {
    const Vec4 r = constraint_residual(p, pose, q);
    return r.cwiseAbs().maxCoeff();
}

// dr/dp of the four closure residuals, rows = legs, columns = (x, y, z, theta).
Mat4 residual_pose_jacobian(const MechanismParams& p, const Pose& pose, const JointAngles& q) {
    Mat4 A;
    for (int i = 0; i < 4; ++i) {
        const Vec3 g = pose.translation() + db_vector(p, i, pose.theta) - base_point(p, i) -
                       upper_link_vector(p, i, q.q[i]);
        A(i, 0) = 2.0 * g.x();
        A(i, 1) = 2.0 * g.y();
        A(i, 2) = 2.0 * g.z();
        A(i, 3) = 2.0 * g.dot(db_vector_dtheta(p, i, pose.theta));
    }
    return A;
}

// Newton refinement of (x, y, z, theta) against the four closure residuals.
// Returns true when max |r_i| < tol.
bool newton_refine(const MechanismParams& p, const JointAngles& q, Pose& pose, double tol,
                   int max_iter, double* residual_out) {
    double res = max_abs_residual(p, pose, q);
    for (int it = 0; it < max_iter && res >= tol; ++it) {
        const Mat4 A = residual_pose_jacobian(p, pose, q);
        Eigen::FullPivLU<Mat4> lu(A);
        if (!lu.isInvertible()) break;
        const Vec4 r = constraint_residual(p, pose, q);
        const Vec4 step = lu.solve(-r);
        pose.x += step[0];
        pose.y += step[1];
        pose.z += step[2];
        pose.theta += step[3];
        res = max_abs_residual(p, pose, q);
    }
    if (residual_out) *residual_out = res;
    return res < tol;
}

struct LinearSolveAtTheta {
    bool degenerate = false;
    Vec3 u = Vec3::Zero();       // Cramer solution (when not degenerate)
    Eigen::Matrix3d M;
    Vec3 b = Vec3::Zero();
    std::array<Vec3, 4> w;       // DB_i - P_i - S_i at this theta
};

LinearSolveAtTheta solve_position_at_theta(const MechanismParams& p, const JointAngles& q,
                                           double theta) {
    LinearSolveAtTheta out;
    for (int i = 0; i < 4; ++i) {
        out.w[i] = db_vector(p, i, theta) - base_point(p, i) - upper_link_vector(p, i, q.q[i]);
    }
    for (int i = 0; i < 3; ++i) {
        out.M.row(i) = 2.0 * (out.w[i + 1] - out.w[0]).transpose();
        out.b[i] = out.w[0].squaredNorm() - out.w[i + 1].squaredNorm();
    }
    const double det = out.M.determinant();
    double scale = 1.0;
    for (int i = 0; i < 3; ++i) scale *= out.M.row(i).norm();
    if (!(std::abs(det) > kDetRelTol * scale)) {
        out.degenerate = true;
        return out;
    }
    // Cramer's rule on the three leg-difference equations.
    Eigen::Matrix3d mx = out.M, my = out.M, mz = out.M;
    mx.col(0) = out.b;
    my.col(1) = out.b;
    mz.col(2) = out.b;
    out.u = Vec3(mx.determinant() / det, my.determinant() / det, mz.determinant() / det);
    return out;
}

double leg1_residual_at(const LinearSolveAtTheta& s, const Vec3& u, double l) {
    return (u + s.w[0]).squaredNorm() - l * l;
}

struct FkCandidate {
    Pose pose;
    double residual = 0.0;
};

// Rank-deficient positional system: solve the least-squares system, then close
// leg 1 along the null direction. Both quadratic roots are genuine assembly
// modes; the caller disambiguates.
void rank2_candidates(const MechanismParams& p, const JointAngles& q, double theta,
                      const LinearSolveAtTheta& s, std::vector<FkCandidate>& out) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(s.M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    const double cutoff = std::max(sv[0] * 1e-10, 1e-14);
    Vec3 inv = Vec3::Zero();
    for (int i = 0; i < 3; ++i) inv[i] = sv[i] > cutoff ? 1.0 / sv[i] : 0.0;
    const Vec3 u_p = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * s.b;
    const Vec3 n = svd.matrixV().col(2);

    const Vec3 c = u_p + s.w[0];
    const double bq = 2.0 * n.dot(c);
    const double cq = c.squaredNorm() - p.l * p.l;
    const double disc = bq * bq - 4.0 * cq;
    if (disc < 0.0) return;
    const double root = std::sqrt(disc);
    for (double sgn : {-1.0, 1.0}) {
        const double sc = 0.5 * (-bq + sgn * root);
        const Vec3 u = u_p + sc * n;
        Pose pose{u.x(), u.y(), u.z(), theta};
        double res = 0.0;
        if (newton_refine(p, q, pose, kClosureTol, 8, &res)) {
            pose.theta = wrap_angle(pose.theta);
            out.push_back({pose, res});
        }
    }
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Ok: return "Ok";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::JointLimit: return "JointLimit";
        case SolveStatus::Singular: return "Singular";
        case SolveStatus::NoConvergence: return "NoConvergence";
        case SolveStatus::NoRealRoot: return "NoRealRoot";
        case SolveStatus::DegenerateLinearSystem: return "DegenerateLinearSystem";
        case SolveStatus::SingularConfiguration: return "SingularConfiguration";
        case SolveStatus::FreeDirection: return "FreeDirection";
    }
    return "Unknown";
}

IJKCoefficients ijk_coefficients(const MechanismParams& p, int leg, const Vec3& shifted) {
    IJKCoefficients c;
    const double X = shifted.x(), Y = shifted.y(), Z = shifted.z();
    c.I = 2.0 * Z * p.L;
    c.J = -2.0 * X * p.L * std::cos(p.phi[leg]) - 2.0 * Y * p.L * std::sin(p.phi[leg]);
    c.K = p.L * p.L - p.l * p.l + X * X + Y * Y + Z * Z;
    return c;
}

LegRoots leg_closure_roots(const MechanismParams& p, int leg, const Pose& pose) {
    LegRoots out;
    const Vec3 shifted = pose.translation() + db_vector(p, leg, pose.theta) - base_point(p, leg);
    const auto [I, J, K] = ijk_coefficients(p, leg, shifted);
    out.discriminant = I * I + J * J - K * K;
    if (out.discriminant < 0.0) return out;

    const double den = K - J;
    const double den_scale = std::abs(K) + std::abs(J);
    if (std::abs(den) > 1e-12 * den_scale) {
        const double root = std::sqrt(out.discriminant);
        out.q[0] = 2.0 * std::atan((-I + root) / den);
        out.branch[0] = +1;
        out.q[1] = 2.0 * std::atan((-I - root) / den);
        out.branch[1] = -1;
        out.count = 2;
        return out;
    }
    // Leading tan-half-angle coefficient vanished: one root escaped to q = pi,
    // the finite one solves the linear remainder 2 I t + (K + J) = 0.
    out.singular = true;
    if (std::abs(I) > 1e-14 * (den_scale + std::abs(I))) {
        out.q[0] = 2.0 * std::atan(-(K + J) / (2.0 * I));
        out.branch[0] = +1;
        out.q[1] = kPi;
        out.branch[1] = -1;
        out.count = 2;
    } else if (std::abs(K + J) <= 1e-12 * den_scale) {
        // Equation degenerated to K (1 + cos q) = 0 with K = J = -K: only q = pi.
        out.q[0] = kPi;
        out.branch[0] = -1;
        out.count = 1;
    }
    return out;
}

IkSolution inverse_kinematics(const MechanismParams& p, const Pose& pose,
                              const JointAngles* branch_hint) {
    IkSolution sol;
    bool infeasible = false;
    bool joint_limit = false;
    bool singular = false;
    for (int i = 0; i < 4; ++i) {
        const LegRoots roots = leg_closure_roots(p, i, pose);
        sol.discriminants[i] = roots.discriminant;
        if (roots.count == 0) {
            if (roots.discriminant >= 0.0) singular = true;
            else infeasible = true;
            sol.joints.q[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        int pick = 0;
        if (roots.count == 2) {
            if (branch_hint) {
                const double d0 = std::abs(wrap_angle(roots.q[0] - branch_hint->q[i]));
                const double d1 = std::abs(wrap_angle(roots.q[1] - branch_hint->q[i]));
                pick = d1 < d0 ? 1 : 0;
            } else {
                const double a0 = std::abs(roots.q[0]);
                const double a1 = std::abs(roots.q[1]);
                if (a1 < a0) pick = 1;
                else if (a1 == a0 && roots.q[1] < roots.q[0]) pick = 1;  // tie: negative branch
            }
        }
        sol.joints.q[i] = roots.q[pick];
        sol.joints.branch[i] = roots.branch[pick];
        if (!(roots.q[pick] >= p.q_min && roots.q[pick] <= p.q_max)) joint_limit = true;
    }
    if (infeasible) sol.status = SolveStatus::Infeasible;
    else if (singular) sol.status = SolveStatus::Singular;
    else if (joint_limit) sol.status = SolveStatus::JointLimit;
    else sol.status = SolveStatus::Ok;
    sol.feasible = sol.status == SolveStatus::Ok;
    return sol;
}

FkResult forward_kinematics_iterative(const MechanismParams& p, const JointAngles& q_prev,
                                      const JointAngles& q_now, const Pose& pose_prev, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("forward_kinematics_iterative: dt must be > 0");
    FkResult out;
    out.method = FkMethod::Iterative;
    Pose pose = pose_prev;

    // Jacobian predictor: p += J dq (the dt in qdot cancels against the step).
    const JacobianResult jac = jacobian(p, pose_prev, q_prev);
    if (jac.status == SolveStatus::Ok) {
        Vec4 dq;
        for (int i = 0; i < 4; ++i) dq[i] = q_now.q[i] - q_prev.q[i];
        const Vec4 dp = jac.J * dq;
        pose.x += dp[0];
        pose.y += dp[1];
        pose.z += dp[2];
        pose.theta += dp[3];
    }

    double res = 0.0;
    if (!newton_refine(p, q_now, pose, kClosureTol, kNewtonMaxIter, &res)) {
        out.pose = pose;
        out.residual_norm = res;
        out.status = SolveStatus::NoConvergence;
        return out;
    }
    pose.theta = wrap_angle(pose.theta);
    out.pose = pose;
    out.residual_norm = res;
    out.status = SolveStatus::Ok;
    return out;
}

FkResult forward_kinematics_direct(const MechanismParams& p, const JointAngles& q,
                                   std::optional<double> theta_hint) {
    FkResult out;
    out.method = FkMethod::Direct;
    const double hint = theta_hint.value_or(0.0);

    const double step = 2.0 * kPi / (kThetaGridSize - 1);
    std::vector<double> theta(kThetaGridSize);
    std::vector<double> F(kThetaGridSize, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> valid(kThetaGridSize, false);
    int degenerate_nodes = 0;

    for (int k = 0; k < kThetaGridSize; ++k) {
        theta[k] = -kPi + step * k;
        const LinearSolveAtTheta s = solve_position_at_theta(p, q, theta[k]);
        if (s.degenerate) {
            ++degenerate_nodes;
            continue;
        }
        F[k] = leg1_residual_at(s, s.u, p.l);
        valid[k] = true;
    }

    std::vector<FkCandidate> candidates;
    auto try_candidate = [&](double th) {
        const LinearSolveAtTheta s = solve_position_at_theta(p, q, th);
        if (s.degenerate) return;
        Pose pose{s.u.x(), s.u.y(), s.u.z(), th};
        double res = 0.0;
        if (newton_refine(p, q, pose, kClosureTol, 8, &res)) {
            pose.theta = wrap_angle(pose.theta);
            candidates.push_back({pose, res});
        }
    };

    for (int k = 0; k < kThetaGridSize; ++k) {
        if (valid[k] && std::abs(F[k]) < kClosureTol) try_candidate(theta[k]);
    }
    for (int k = 0; k + 1 < kThetaGridSize; ++k) {
        if (!valid[k] || !valid[k + 1]) continue;
        if (!(F[k] * F[k + 1] < 0.0)) continue;
        double a = theta[k], b = theta[k + 1];
        double fa = F[k];
        for (int it = 0; it < kBisectIter; ++it) {
            const double mid = 0.5 * (a + b);
            const LinearSolveAtTheta s = solve_position_at_theta(p, q, mid);
            if (s.degenerate) break;
            const double fm = leg1_residual_at(s, s.u, p.l);
            if (fa * fm <= 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        try_candidate(0.5 * (a + b));
    }

    // Positional system singular across the grid: symmetric configurations
    // (equal sin q_i) zero the z-column for every theta. Scan the rank-2
    // closure instead.
    if (degenerate_nodes > 0 && candidates.empty()) {
        for (int k = 0; k < kThetaGridSize; ++k) {
            const LinearSolveAtTheta s = solve_position_at_theta(p, q, theta[k]);
            if (!s.degenerate) continue;
            rank2_candidates(p, q, theta[k], s, candidates);
        }
    }

    if (candidates.empty()) {
        out.status = degenerate_nodes == kThetaGridSize ? SolveStatus::DegenerateLinearSystem
                                                        : SolveStatus::NoRealRoot;
        return out;
    }

    // Dedupe and pick the root nearest the hint; equal-theta duplicates keep
    // the lower-z assembly mode (the plate-below-elbow operating branch).
    std::sort(candidates.begin(), candidates.end(), [&](const FkCandidate& a, const FkCandidate& b) {
        const double da = std::abs(wrap_angle(a.pose.theta - hint));
        const double db = std::abs(wrap_angle(b.pose.theta - hint));
        if (std::abs(da - db) > 1e-9) return da < db;
        return a.pose.z < b.pose.z;
    });
    const FkCandidate& best = candidates.front();
    out.pose = best.pose;
    out.residual_norm = best.residual;
    out.status = SolveStatus::Ok;
    return out;
}

JacobianResult jacobian(const MechanismParams& p, const Pose& pose, const JointAngles& q) {
    JacobianResult out;
    const Mat4 A = residual_pose_jacobian(p, pose, q);
    Mat4 B = Mat4::Zero();
    for (int i = 0; i < 4; ++i) {
        const Vec3 g = pose.translation() + db_vector(p, i, pose.theta) - base_point(p, i) -
                       upper_link_vector(p, i, q.q[i]);
        // B = -dr/dq; dr/dq_i = -2 g . S_i'(q_i)
        B(i, i) = 2.0 * g.dot(upper_link_vector_dq(p, i, q.q[i]));
    }
    const double det = A.determinant();
    double scale = 1.0;
    for (int i = 0; i < 4; ++i) scale *= A.row(i).norm();
    if (!(std::abs(det) > 1e-12 * scale)) {
        out.status = SolveStatus::SingularConfiguration;
        return out;
    }
    out.J = A.partialPivLu().solve(B);
    out.status = SolveStatus::Ok;
    return out;
}

}  // namespace tactor

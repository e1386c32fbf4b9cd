#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <string>
#include <vector>

#include "taskimp/errors.hpp"

namespace taskimp {

struct Pose {
    Eigen::Vector3d position{0, 0, 0};
    Eigen::Quaterniond orientation{1, 0, 0, 0};
};

struct RevoluteJoint {
    std::string name;
    Eigen::Vector3d axis{0, 0, 1};                    // unit, in the pre-rotation frame
    Eigen::Quaterniond link_rotation{1, 0, 0, 0};     // fixed transform to the next frame
    Eigen::Vector3d link_translation{0, 0, 0};
    std::optional<std::array<double, 2>> limits;      // [lo, hi] radians
};

/// Serial chain of revolute joints. The frame update per joint is
/// rotate-about-axis first, then the fixed link transform; the end effector
/// sits at the final frame origin.
struct KinematicChain {
    std::string name;
    Pose base_pose;
    std::vector<RevoluteJoint> joints;

    std::size_t dof() const { return joints.size(); }
    void validate() const;
};

using JointVector = Eigen::VectorXd;

KinematicChain load_chain(const std::string& path);
KinematicChain parse_chain_json(const std::string& json_text, const std::string& location);
std::string chain_to_json(const KinematicChain& chain);

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q);

/// 3xN positional Jacobian: column i = axis_i x (p_end - p_i), world frame.
Eigen::Matrix3Xd translational_jacobian(const KinematicChain& chain, const JointVector& q);

struct IkOptions {
    double lambda = 0.05;        // DLS damping
    int max_iters = 200;
    double tol_m = 1e-5;
    double max_step_rad = 0.1;   // per-iteration joint-step clamp
};

struct IkResult {
    JointVector q;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Position-only damped-least-squares IK. On non-convergence the best
/// iterate and its residual are still returned with converged = false.
IkResult solve_ik_dls(const KinematicChain& chain, const JointVector& q0,
                      const Pose& target, const IkOptions& opts = {});

}  // namespace taskimp

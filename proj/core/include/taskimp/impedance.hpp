#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <utility>

#include "taskimp/errors.hpp"

namespace taskimp {

enum class ArmSide { Left, Right };

const char* to_string(ArmSide side);
ArmSide arm_side_from_string(const std::string& s);

/// Diagonal virtual mass / damping / stiffness triples for one arm.
struct ImpedanceParams {
    Eigen::Vector3d mass{1.0, 1.0, 1.0};
    Eigen::Vector3d damping{1.0, 1.0, 1.0};
    Eigen::Vector3d stiffness{1.0, 1.0, 1.0};

    /// All nine entries must be strictly positive and finite.
    void validate() const;
};

/// Translational end-effector state plus the carried (unregulated) orientation.
struct ImpedanceState {
    Eigen::Vector3d position{0, 0, 0};
    Eigen::Vector3d velocity{0, 0, 0};
    Eigen::Vector3d reference_position{0, 0, 0};
    Eigen::Vector3d reference_velocity{0, 0, 0};
    Eigen::Quaterniond orientation{1, 0, 0, 0};
    double time = 0.0;

    void validate() const;
};

struct VirtualForce {
    Eigen::Vector3d force{0, 0, 0};
};

/// e = x_ref - x, edot = xdot_ref - xdot.
std::pair<Eigen::Vector3d, Eigen::Vector3d> translational_error(const ImpedanceState& state);

/// F_i = k_i * e_i + d_i * edot_i, component-wise.
VirtualForce virtual_force(const ImpedanceParams& params,
                           const Eigen::Vector3d& error,
                           const Eigen::Vector3d& error_rate);

/// One semi-implicit Euler step of M xddot = F_virt + F_ext, with F_virt
/// evaluated from the pre-step error. References and orientation pass
/// through unchanged; time advances by dt.
/// Throws NonFiniteState if the output is non-finite.
ImpedanceState step_impedance(const ImpedanceState& state,
                              const ImpedanceParams& params,
                              const Eigen::Vector3d& external_force,
                              double dt);

/// Closed-form solution e(t) of the homogeneous per-axis ODE
/// m*eddot + d*edot + k*e = 0, branch-selected on the sign of d^2 - 4mk.
Eigen::Vector3d analytic_free_response(const ImpedanceParams& params,
                                       const Eigen::Vector3d& e0,
                                       const Eigen::Vector3d& edot0,
                                       double t);

}  // namespace taskimp

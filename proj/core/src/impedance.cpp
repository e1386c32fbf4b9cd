#include "taskimp/impedance.hpp"

#include <cmath>
#include <string>

namespace taskimp {

const char* to_string(ArmSide side) {
    return side == ArmSide::Left ? "left" : "right";
}

ArmSide arm_side_from_string(const std::string& s) {
    if (s == "left" || s == "L") return ArmSide::Left;
    if (s == "right" || s == "R") return ArmSide::Right;
    throw ValidationError("arm must be 'left' or 'right', got '" + s + "'");
}

namespace {

bool finite(const Eigen::Vector3d& v) {
    return v.allFinite();
}

}  // namespace

void ImpedanceParams::validate() const {
    for (const auto* v : {&mass, &damping, &stiffness}) {
        if (!finite(*v) || (v->array() <= 0.0).any()) {
            throw ValidationError("impedance parameters must be strictly positive and finite");
        }
    }
}

void ImpedanceState::validate() const {
    if (!finite(position) || !finite(velocity) || !finite(reference_position) ||
        !finite(reference_velocity) || !std::isfinite(time)) {
        throw ValidationError("impedance state must be finite");
    }
    if (std::abs(orientation.norm() - 1.0) > 1e-9) {
        throw ValidationError("orientation quaternion must have unit norm");
    }
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> translational_error(const ImpedanceState& state) {
    return {state.reference_position - state.position,
            state.reference_velocity - state.velocity};
}

VirtualForce virtual_force(const ImpedanceParams& params,
                           const Eigen::Vector3d& error,
                           const Eigen::Vector3d& error_rate) {
    VirtualForce f;
    f.force = params.stiffness.cwiseProduct(error) + params.damping.cwiseProduct(error_rate);
    return f;
}

ImpedanceState step_impedance(const ImpedanceState& state,
                              const ImpedanceParams& params,
                              const Eigen::Vector3d& external_force,
                              double dt) {
    const auto [e, edot] = translational_error(state);
    const Eigen::Vector3d f = virtual_force(params, e, edot).force + external_force;
    const Eigen::Vector3d accel = f.cwiseQuotient(params.mass);

    ImpedanceState next = state;
    next.velocity = state.velocity + dt * accel;
    next.position = state.position + dt * next.velocity;
    next.time = state.time + dt;

    if (!next.position.allFinite() || !next.velocity.allFinite()) {
        throw NonFiniteState("integration diverged at t=" + std::to_string(state.time));
    }
    return next;
}

namespace {

double free_response_axis(double m, double d, double k, double e0, double v0, double t) {
    const double disc = d * d - 4.0 * m * k;
    const double tol = 1e-12 * std::max({d * d, 4.0 * m * k, 1.0});
    if (std::abs(disc) <= tol) {
        const double r = -d / (2.0 * m);
        return (e0 + (v0 - r * e0) * t) * std::exp(r * t);
    }
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double r1 = (-d + s) / (2.0 * m);
        const double r2 = (-d - s) / (2.0 * m);
        const double a = (v0 - r2 * e0) / (r1 - r2);
        return a * std::exp(r1 * t) + (e0 - a) * std::exp(r2 * t);
    }
    const double w = std::sqrt(-disc) / (2.0 * m);
    const double alpha = -d / (2.0 * m);
    return std::exp(alpha * t) * (e0 * std::cos(w * t) + (v0 - alpha * e0) / w * std::sin(w * t));
}

}  // namespace

Eigen::Vector3d analytic_free_response(const ImpedanceParams& params,
                                       const Eigen::Vector3d& e0,
                                       const Eigen::Vector3d& edot0,
                                       double t) {
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) {
        out[i] = free_response_axis(params.mass[i], params.damping[i], params.stiffness[i],
                                    e0[i], edot0[i], t);
    }
    return out;
}

}  // namespace taskimp

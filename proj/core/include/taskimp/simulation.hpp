#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>
#include <vector>

#include "taskimp/errors.hpp"
#include "taskimp/impedance.hpp"
#include "taskimp/kinematics.hpp"
#include "taskimp/retrieval.hpp"

namespace taskimp {

/// Surface profile along the sweep direction, relative to the flat base z.
struct FlatProfile {};
struct SineProfile {
    double amplitude = 0.02;   // m
    double wavelength = 0.3;   // m
    double x0 = 0.32;          // profile anchor (world x)
};
struct SampledProfile {
    std::vector<std::pair<double, double>> samples;  // (arc-length from x0, height)
    double x0 = 0.32;
};

/// Unilateral spring-damper environment: the surface only pushes up.
struct Environment {
    double surface_z = 0.0;            // flat base height
    double contact_stiffness = 500.0;  // k_env, arb./m, > 0
    double contact_damping = 5.0;      // d_env, >= 0
    std::variant<FlatProfile, SineProfile, SampledProfile> profile;

    double surface_height(double x, double y) const;
    void validate() const;
};

/// Two-column CSV (arc-length m, height m), linearly interpolated, clamped
/// at the ends.
SampledProfile load_heightfield_csv(const std::string& path, double x0);

/// Zero above the surface; below it F_z = k_env*(z_s - z) - d_env*zdot,
/// clamped at >= 0. x and y components are always zero.
Eigen::Vector3d contact_force(const Environment& env, const Eigen::Vector3d& position,
                              const Eigen::Vector3d& velocity);

struct TrajectorySample {
    double t = 0.0;
    Eigen::Vector3d position{0, 0, 0};
    Eigen::Vector3d velocity{0, 0, 0};
};

struct TrajectorySpec {
    std::string task_id;
    double duration = 0.0;                 // s; samples.size() == duration*50 + 1
    std::vector<TrajectorySample> samples;  // 50 Hz
};

struct SimConfig {
    double dt = 0.02;
    double press_depth = 0.01;    // m below the surface for pressure tasks
    double glide_depth = 0.001;   // m below the surface for surface following
    double poke_depth = 0.005;    // m below the surface for tool pokes
    double button_depth = 0.002;  // m below the surface for button presses
    double sweep_speed = 0.05;    // m/s lateral sweep
    double sweep_length = 0.2;    // m
    double lift_height = 0.15;    // m above the surface for grasp lifts
    Eigen::Vector2d anchor_right{0.32, -0.10};  // task anchor (x, y) per arm
    Eigen::Vector2d anchor_left{0.32, 0.10};
    IkOptions ik;

    const Eigen::Vector2d& anchor(ArmSide arm) const {
        return arm == ArmSide::Left ? anchor_left : anchor_right;
    }
};

/// Deterministic 50 Hz reference for one of the known task motions.
TrajectorySpec plan_trajectory(const std::string& task_id, ArmSide arm, const Environment& env,
                               const SimConfig& cfg);

struct TraceRow {
    double t = 0.0;
    Eigen::Vector3d x_ref{0, 0, 0};
    Eigen::Vector3d x{0, 0, 0};       // plant pose (FK of the IK solution)
    Eigen::Vector3d e{0, 0, 0};       // impedance error state
    Eigen::Vector3d edot{0, 0, 0};
    Eigen::Vector3d f_virt{0, 0, 0};
    Eigen::Vector3d f_env{0, 0, 0};
    JointVector q;
};

struct Trace {
    std::vector<TraceRow> rows;
};

enum class ScenarioStatus { Ok, NonFinite, IkFailed };

struct ScenarioResult {
    Trace trace;  // partial on abort
    ScenarioStatus status = ScenarioStatus::Ok;
    std::string message;
};

/// Closed loop at 50 Hz: reference sample -> impedance step forced by the
/// contact force at the plant pose -> DLS IK toward the integrated virtual
/// pose -> FK gives the plant pose for the next tick.
ScenarioResult run_scenario(const std::string& task_id, const ControlParameters& params,
                            const KinematicChain& chain, const Environment& env,
                            const SimConfig& cfg);

struct TaskMetrics {
    double mean_abs_e_z = 0.0;
    double max_abs_e_z = 0.0;
    double max_abs_f_virt_z = 0.0;
};

TaskMetrics compute_metrics(const Trace& trace);

std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& csv_text);

std::string metrics_to_json(const std::string& task_id, ArmSide arm, const ControlParameters& p,
                            const TaskMetrics& m);

}  // namespace taskimp

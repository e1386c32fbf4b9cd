#include "taskimp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace taskimp {

using nlohmann::json;

void Environment::validate() const {
    if (!(contact_stiffness > 0.0) || !std::isfinite(contact_stiffness)) {
        throw ValidationError("contact_stiffness must be > 0");
    }
    if (contact_damping < 0.0 || !std::isfinite(contact_damping)) {
        throw ValidationError("contact_damping must be >= 0");
    }
    if (const auto* s = std::get_if<SampledProfile>(&profile)) {
        if (s->samples.empty()) throw ValidationError("sampled profile has no samples");
        for (const auto& [arc, h] : s->samples) {
            if (!std::isfinite(arc) || !std::isfinite(h)) {
                throw ValidationError("heightfield samples must be finite");
            }
        }
    }
}

double Environment::surface_height(double x, double /*y*/) const {
    if (std::holds_alternative<FlatProfile>(profile)) return surface_z;
    if (const auto* s = std::get_if<SineProfile>(&profile)) {
        return surface_z +
               s->amplitude * std::sin(2.0 * std::numbers::pi * (x - s->x0) / s->wavelength);
    }
    const auto& sp = std::get<SampledProfile>(profile);
    const double arc = x - sp.x0;
    const auto& samples = sp.samples;
    if (arc <= samples.front().first) return surface_z + samples.front().second;
    if (arc >= samples.back().first) return surface_z + samples.back().second;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (arc <= samples[i].first) {
            const auto [s0, h0] = samples[i - 1];
            const auto [s1, h1] = samples[i];
            const double f = (arc - s0) / (s1 - s0);
            return surface_z + h0 + f * (h1 - h0);
        }
    }
    return surface_z + samples.back().second;
}

SampledProfile load_heightfield_csv(const std::string& path, double x0) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open heightfield file");
    SampledProfile out;
    out.x0 = x0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b)) {
            throw ParseError(path + ":" + std::to_string(lineno), "expected two columns");
        }
        try {
            out.samples.emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header row
            throw ParseError(path + ":" + std::to_string(lineno), "expected numeric columns");
        }
    }
    if (out.samples.empty()) throw ParseError(path, "heightfield has no samples");
    if (!std::is_sorted(out.samples.begin(), out.samples.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        throw ParseError(path, "heightfield arc-lengths must be increasing");
    }
    return out;
}

Eigen::Vector3d contact_force(const Environment& env, const Eigen::Vector3d& position,
                              const Eigen::Vector3d& velocity) {
    const double zs = env.surface_height(position.x(), position.y());
    if (position.z() >= zs) return Eigen::Vector3d::Zero();
    const double fz = env.contact_stiffness * (zs - position.z()) -
                      env.contact_damping * velocity.z();
    return {0.0, 0.0, std::max(fz, 0.0)};
}

namespace {

double smoothstep(double tau) {
    tau = std::clamp(tau, 0.0, 1.0);
    return tau * tau * (3.0 - 2.0 * tau);
}

/// Piecewise motion built from hold and smooth-move segments; sampled
/// positions get central-difference velocities.
class MotionPlan {
public:
    explicit MotionPlan(Eigen::Vector3d start) : start_(std::move(start)) {}

    void hold(double duration) { segments_.push_back({start_of_next(), start_of_next(), duration}); }

    void move_to(const Eigen::Vector3d& target, double duration) {
        segments_.push_back({start_of_next(), target, duration});
    }

    /// Position driven by a custom function of segment-local time.
    void follow(std::function<Eigen::Vector3d(double)> fn, double duration) {
        segments_.push_back({{}, {}, duration, std::move(fn)});
    }

    double duration() const {
        double total = 0.0;
        for (const auto& s : segments_) total += s.duration;
        return total;
    }

    Eigen::Vector3d position(double t) const {
        double base = 0.0;
        for (const auto& s : segments_) {
            if (t <= base + s.duration || &s == &segments_.back()) {
                const double local = std::clamp(t - base, 0.0, s.duration);
                if (s.fn) return s.fn(local);
                const double tau = s.duration > 0.0 ? local / s.duration : 1.0;
                return s.from + smoothstep(tau) * (s.to - s.from);
            }
            base += s.duration;
        }
        return start_;
    }

private:
    struct Segment {
        Eigen::Vector3d from;
        Eigen::Vector3d to;
        double duration = 0.0;
        std::function<Eigen::Vector3d(double)> fn;
    };

    Eigen::Vector3d start_of_next() const {
        if (segments_.empty()) return start_;
        const auto& last = segments_.back();
        return last.fn ? last.fn(last.duration) : last.to;
    }

    Eigen::Vector3d start_;
    std::vector<Segment> segments_;
};

TrajectorySpec sample_plan(const std::string& task_id, const MotionPlan& plan, double dt) {
    TrajectorySpec spec;
    spec.task_id = task_id;
    spec.duration = plan.duration();
    const auto steps = static_cast<std::size_t>(std::llround(spec.duration / dt));
    spec.samples.resize(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        spec.samples[i].t = static_cast<double>(i) * dt;
        spec.samples[i].position = plan.position(spec.samples[i].t);
    }
    for (std::size_t i = 0; i <= steps; ++i) {
        if (i == 0) {
            spec.samples[i].velocity = (spec.samples[1].position - spec.samples[0].position) / dt;
        } else if (i == steps) {
            spec.samples[i].velocity =
                (spec.samples[i].position - spec.samples[i - 1].position) / dt;
        } else {
            spec.samples[i].velocity =
                (spec.samples[i + 1].position - spec.samples[i - 1].position) / (2.0 * dt);
        }
    }
    return spec;
}

}  // namespace

TrajectorySpec plan_trajectory(const std::string& task_id, ArmSide arm, const Environment& env,
                               const SimConfig& cfg) {
    const Eigen::Vector2d a = cfg.anchor(arm);
    const double zs = env.surface_height(a.x(), a.y());
    const auto at = [&](double x, double y, double z) { return Eigen::Vector3d{x, y, z}; };

    if (task_id == "follow_surface" || task_id == "wipe_surface") {
        // glide just below the height profile along a lateral sweep
        const double sweep_t = cfg.sweep_length / cfg.sweep_speed;
        MotionPlan plan(at(a.x(), a.y(), zs - cfg.glide_depth));
        plan.hold(1.0);
        plan.follow(
            [&, a](double local) {
                const double x = a.x() + cfg.sweep_speed * local;
                return at(x, a.y(), env.surface_height(x, a.y()) - cfg.glide_depth);
            },
            sweep_t);
        plan.hold(1.0);
        return sample_plan(task_id, plan, cfg.dt);
    }
    if (task_id == "apply_pressure") {
        MotionPlan plan(at(a.x(), a.y(), zs + 0.05));
        plan.move_to(at(a.x(), a.y(), zs - cfg.press_depth), 2.0);
        plan.hold(6.0);
        plan.move_to(at(a.x(), a.y(), zs + 0.05), 2.0);
        return sample_plan(task_id, plan, cfg.dt);
    }
    if (task_id == "dual_placement_egg" || task_id == "dual_placement_bottle") {
        MotionPlan plan(at(a.x(), a.y(), zs + 0.12));
        plan.move_to(at(a.x(), a.y(), zs), 3.0);
        plan.hold(1.0);  // release
        plan.move_to(at(a.x(), a.y(), zs + 0.08), 2.0);
        return sample_plan(task_id, plan, cfg.dt);
    }
    if (task_id == "tool_interaction" || task_id == "press_button") {
        const double depth = task_id == "tool_interaction" ? cfg.poke_depth : cfg.button_depth;
        MotionPlan plan(at(a.x(), a.y(), zs + 0.06));
        plan.hold(0.9);
        plan.move_to(at(a.x(), a.y(), zs - depth), 0.8);
        plan.hold(0.5);
        plan.move_to(at(a.x(), a.y(), zs + 0.06), 0.8);
        plan.hold(1.0);
        return sample_plan(task_id, plan, cfg.dt);
    }
    if (task_id == "grasp_from_table") {
        MotionPlan plan(at(a.x(), a.y(), zs));
        plan.hold(1.0);  // close the gripper
        plan.move_to(at(a.x(), a.y(), zs + cfg.lift_height), 3.0);
        plan.hold(1.0);
        return sample_plan(task_id, plan, cfg.dt);
    }
    if (task_id == "handover") {
        MotionPlan plan(at(a.x(), a.y(), zs + 0.05));
        plan.move_to(at(a.x() + 0.06, a.y(), zs + 0.12), 2.5);
        plan.hold(1.5);
        return sample_plan(task_id, plan, cfg.dt);
    }
    throw UnknownTask(task_id);
}

ScenarioResult run_scenario(const std::string& task_id, const ControlParameters& params,
                            const KinematicChain& chain, const Environment& env,
                            const SimConfig& cfg) {
    env.validate();
    params.impedance.validate();
    const TrajectorySpec traj = plan_trajectory(task_id, params.scenario.arm, env, cfg);

    ScenarioResult result;
    // The virtual pose starts on the reference; the plant starts at the IK
    // solution for it.
    ImpedanceState state;
    state.position = traj.samples[0].position;
    state.velocity = traj.samples[0].velocity;
    state.reference_position = traj.samples[0].position;
    state.reference_velocity = traj.samples[0].velocity;

    JointVector q = JointVector::Zero(static_cast<Eigen::Index>(chain.dof()));
    {
        IkOptions seed_opts = cfg.ik;
        seed_opts.max_iters = std::max(cfg.ik.max_iters, 400);
        const IkResult seed = solve_ik_dls(chain, q, Pose{state.position, {1, 0, 0, 0}}, seed_opts);
        if (!seed.converged) {
            result.status = ScenarioStatus::IkFailed;
            result.message = "seed ik did not converge: residual " +
                             std::to_string(seed.residual);
            return result;
        }
        q = seed.q;
    }

    Eigen::Vector3d plant = forward_kinematics(chain, q).position;
    Eigen::Vector3d plant_prev = plant;

    for (std::size_t n = 0; n < traj.samples.size(); ++n) {
        const Eigen::Vector3d plant_vel =
            n == 0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d((plant - plant_prev) / cfg.dt);
        const Eigen::Vector3d f_env = contact_force(env, plant, plant_vel);
        const auto [e, edot] = translational_error(state);

        TraceRow row;
        row.t = state.time;
        row.x_ref = state.reference_position;
        row.x = plant;
        row.e = e;
        row.edot = edot;
        row.f_virt = virtual_force(params.impedance, e, edot).force;
        row.f_env = f_env;
        row.q = q;
        result.trace.rows.push_back(std::move(row));

        if (n + 1 == traj.samples.size()) break;

        try {
            state = step_impedance(state, params.impedance, f_env, cfg.dt);
        } catch (const NonFiniteState& ex) {
            result.status = ScenarioStatus::NonFinite;
            result.message = ex.what();
            return result;
        }

        // Advance the reference to the next sample, carrying the impedance
        // offset so the error state obeys the free dynamics exactly and
        // deviations come only from contact.
        const TrajectorySample& next = traj.samples[n + 1];
        const Eigen::Vector3d dr =
            next.position - (state.reference_position + cfg.dt * state.reference_velocity);
        const Eigen::Vector3d drdot = next.velocity - state.reference_velocity;
        state.position += dr;
        state.velocity += drdot;
        state.reference_position = next.position;
        state.reference_velocity = next.velocity;
        if (!state.position.allFinite() || !state.velocity.allFinite()) {
            result.status = ScenarioStatus::NonFinite;
            result.message = "reference advance produced a non-finite state";
            return result;
        }

        plant_prev = plant;
        const IkResult ik = solve_ik_dls(chain, q, Pose{state.position, {1, 0, 0, 0}}, cfg.ik);
        if (!ik.converged) {
            result.status = ScenarioStatus::IkFailed;
            result.message = "ik did not converge at t=" + std::to_string(state.time) +
                             ": residual " + std::to_string(ik.residual);
            return result;
        }
        q = ik.q;
        plant = forward_kinematics(chain, q).position;
    }
    return result;
}

TaskMetrics compute_metrics(const Trace& trace) {
    if (trace.rows.empty()) throw EmptyTrace();
    TaskMetrics m;
    double sum = 0.0;
    for (const auto& row : trace.rows) {
        const double ez = std::abs(row.e.z());
        sum += ez;
        m.max_abs_e_z = std::max(m.max_abs_e_z, ez);
        m.max_abs_f_virt_z = std::max(m.max_abs_f_virt_z, std::abs(row.f_virt.z()));
    }
    m.mean_abs_e_z = sum / static_cast<double>(trace.rows.size());
    return m;
}

namespace {

void append_vec(std::ostringstream& out, const Eigen::Vector3d& v) {
    char buf[32];
    for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v[i]);
        out << buf;
    }
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream out;
    const auto dof = trace.rows.empty() ? 0 : trace.rows.front().q.size();
    out << "t,x_ref_x,x_ref_y,x_ref_z,x_x,x_y,x_z,e_x,e_y,e_z,edot_x,edot_y,edot_z,"
           "F_virt_x,F_virt_y,F_virt_z,F_env_x,F_env_y,F_env_z";
    for (Eigen::Index i = 0; i < dof; ++i) out << ",q_" << i;
    out << "\n";
    char buf[32];
    for (const auto& row : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.t);
        out << buf;
        append_vec(out, row.x_ref);
        append_vec(out, row.x);
        append_vec(out, row.e);
        append_vec(out, row.edot);
        append_vec(out, row.f_virt);
        append_vec(out, row.f_env);
        for (Eigen::Index i = 0; i < row.q.size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", row.q[i]);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

Trace trace_from_csv(const std::string& csv_text) {
    Trace trace;
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("trace csv", "empty input");
    const std::size_t header_cols = static_cast<std::size_t>(
        std::count(line.begin(), line.end(), ',') + 1);
    if (header_cols < 19) throw ParseError("trace csv", "unexpected header");
    const std::size_t dof = header_cols - 19;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != header_cols) {
            throw ParseError("trace csv:" + std::to_string(lineno), "column count mismatch");
        }
        TraceRow r;
        r.t = vals[0];
        r.x_ref = {vals[1], vals[2], vals[3]};
        r.x = {vals[4], vals[5], vals[6]};
        r.e = {vals[7], vals[8], vals[9]};
        r.edot = {vals[10], vals[11], vals[12]};
        r.f_virt = {vals[13], vals[14], vals[15]};
        r.f_env = {vals[16], vals[17], vals[18]};
        r.q = JointVector(static_cast<Eigen::Index>(dof));
        for (std::size_t i = 0; i < dof; ++i) r.q[static_cast<Eigen::Index>(i)] = vals[19 + i];
        trace.rows.push_back(std::move(r));
    }
    return trace;
}

std::string metrics_to_json(const std::string& task_id, ArmSide arm, const ControlParameters& p,
                            const TaskMetrics& m) {
    json doc;
    doc["schema_version"] = 1;
    doc["task_id"] = task_id;
    doc["arm"] = to_string(arm);
    doc["K_z"] = p.impedance.stiffness.z();
    doc["D_z"] = p.impedance.damping.z();
    doc["mean_abs_e_z"] = m.mean_abs_e_z;
    doc["max_abs_e_z"] = m.max_abs_e_z;
    doc["max_abs_F_virt_z"] = m.max_abs_f_virt_z;
    return doc.dump(2);
}

}  // namespace taskimp

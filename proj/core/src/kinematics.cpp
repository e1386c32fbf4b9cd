#include "taskimp/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace taskimp {

using nlohmann::json;

void KinematicChain::validate() const {
    if (joints.empty() || joints.size() > 10) {
        throw ValidationError("chain '" + name + "' must have between 1 and 10 joints, has " +
                              std::to_string(joints.size()));
    }
    for (const auto& j : joints) {
        if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
            throw ValidationError("joint '" + j.name + "' axis must have unit norm");
        }
        if (j.limits && (*j.limits)[0] > (*j.limits)[1]) {
            throw ValidationError("joint '" + j.name + "' limits must satisfy lo <= hi");
        }
    }
    if (std::abs(base_pose.orientation.norm() - 1.0) > 1e-9) {
        throw ValidationError("base pose orientation must have unit norm");
    }
}

namespace {

Eigen::Quaterniond quat_from_json(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 4) {
        throw ParseError(where, "quaternion must be an array [w, x, y, z]");
    }
    return Eigen::Quaterniond(a[0].get<double>(), a[1].get<double>(),
                              a[2].get<double>(), a[3].get<double>());
}

Eigen::Vector3d vec3_from_json(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 3) {
        throw ParseError(where, "expected an array of 3 numbers");
    }
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

Eigen::Isometry3d to_isometry(const Pose& p) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = p.orientation.toRotationMatrix();
    t.translation() = p.position;
    return t;
}

}  // namespace

KinematicChain parse_chain_json(const std::string& json_text, const std::string& location) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(location, e.what());
    }
    KinematicChain chain;
    try {
        chain.name = doc.at("name").get<std::string>();
        const auto& bp = doc.at("base_pose");
        chain.base_pose.position = vec3_from_json(bp.at("position"), location);
        chain.base_pose.orientation = quat_from_json(bp.at("orientation_quat"), location);
        for (const auto& jj : doc.at("joints")) {
            RevoluteJoint j;
            j.name = jj.value("name", "");
            j.axis = vec3_from_json(jj.at("axis"), location);
            j.link_translation = vec3_from_json(jj.at("link_translation"), location);
            j.link_rotation = quat_from_json(jj.at("link_rotation_quat"), location);
            if (jj.contains("limits")) {
                const auto& lim = jj.at("limits");
                j.limits = std::array<double, 2>{lim.at(0).get<double>(), lim.at(1).get<double>()};
            }
            chain.joints.push_back(std::move(j));
        }
    } catch (const json::exception& e) {
        throw ParseError(location, e.what());
    }
    chain.validate();
    return chain;
}

KinematicChain load_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open chain file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_chain_json(ss.str(), path);
}

std::string chain_to_json(const KinematicChain& chain) {
    json doc;
    doc["name"] = chain.name;
    doc["base_pose"] = {
        {"position", {chain.base_pose.position.x(), chain.base_pose.position.y(),
                      chain.base_pose.position.z()}},
        {"orientation_quat", {chain.base_pose.orientation.w(), chain.base_pose.orientation.x(),
                              chain.base_pose.orientation.y(), chain.base_pose.orientation.z()}}};
    doc["joints"] = json::array();
    for (const auto& j : chain.joints) {
        json jj;
        if (!j.name.empty()) jj["name"] = j.name;
        jj["axis"] = {j.axis.x(), j.axis.y(), j.axis.z()};
        jj["link_translation"] = {j.link_translation.x(), j.link_translation.y(),
                                  j.link_translation.z()};
        jj["link_rotation_quat"] = {j.link_rotation.w(), j.link_rotation.x(), j.link_rotation.y(),
                                    j.link_rotation.z()};
        if (j.limits) jj["limits"] = {(*j.limits)[0], (*j.limits)[1]};
        doc["joints"].push_back(jj);
    }
    return doc.dump(2);
}

namespace {

void check_dims(const KinematicChain& chain, const JointVector& q) {
    if (static_cast<std::size_t>(q.size()) != chain.dof()) {
        throw DimensionMismatch("joint vector has " + std::to_string(q.size()) +
                                " entries, chain '" + chain.name + "' has " +
                                std::to_string(chain.dof()) + " joints");
    }
}

/// Frame origins and world axes for every joint plus the end-effector frame.
struct FramePass {
    std::vector<Eigen::Vector3d> joint_origins;
    std::vector<Eigen::Vector3d> world_axes;
    Eigen::Isometry3d end;
};

FramePass walk_chain(const KinematicChain& chain, const JointVector& q) {
    FramePass out;
    Eigen::Isometry3d t = to_isometry(chain.base_pose);
    for (std::size_t i = 0; i < chain.joints.size(); ++i) {
        const auto& j = chain.joints[i];
        out.joint_origins.push_back(t.translation());
        out.world_axes.push_back(t.linear() * j.axis);
        t = t * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis);
        Eigen::Isometry3d link = Eigen::Isometry3d::Identity();
        link.linear() = j.link_rotation.toRotationMatrix();
        link.translation() = j.link_translation;
        t = t * link;
    }
    out.end = t;
    return out;
}

}  // namespace

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q) {
    check_dims(chain, q);
    const FramePass fp = walk_chain(chain, q);
    Pose p;
    p.position = fp.end.translation();
    p.orientation = Eigen::Quaterniond(fp.end.linear()).normalized();
    return p;
}

Eigen::Matrix3Xd translational_jacobian(const KinematicChain& chain, const JointVector& q) {
    check_dims(chain, q);
    const FramePass fp = walk_chain(chain, q);
    const Eigen::Vector3d p_end = fp.end.translation();
    Eigen::Matrix3Xd jac(3, static_cast<Eigen::Index>(chain.dof()));
    for (std::size_t i = 0; i < chain.dof(); ++i) {
        jac.col(static_cast<Eigen::Index>(i)) =
            fp.world_axes[i].cross(p_end - fp.joint_origins[i]);
    }
    return jac;
}

IkResult solve_ik_dls(const KinematicChain& chain, const JointVector& q0,
                      const Pose& target, const IkOptions& opts) {
    check_dims(chain, q0);
    if (opts.lambda <= 0.0) throw ValidationError("ik lambda must be > 0");
    if (opts.tol_m <= 0.0) throw ValidationError("ik tol_m must be > 0");

    auto clamp_limits = [&chain](JointVector& q) {
        for (std::size_t i = 0; i < chain.dof(); ++i) {
            if (chain.joints[i].limits) {
                const auto& lim = *chain.joints[i].limits;
                q[static_cast<Eigen::Index>(i)] =
                    std::clamp(q[static_cast<Eigen::Index>(i)], lim[0], lim[1]);
            }
        }
    };

    IkResult best;
    best.q = q0;
    best.residual = (forward_kinematics(chain, q0).position - target.position).norm();

    JointVector q = q0;
    double residual = best.residual;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (residual <= opts.tol_m) {
            best.q = q;
            best.residual = residual;
            best.iterations = iter;
            best.converged = true;
            return best;
        }
        const Eigen::Vector3d dx = target.position - forward_kinematics(chain, q).position;
        const Eigen::Matrix3Xd jac = translational_jacobian(chain, q);
        const Eigen::Matrix3d jjt =
            jac * jac.transpose() + opts.lambda * opts.lambda * Eigen::Matrix3d::Identity();
        JointVector dq = jac.transpose() * jjt.ldlt().solve(dx);
        const double step = dq.lpNorm<Eigen::Infinity>();
        if (step > opts.max_step_rad) dq *= opts.max_step_rad / step;
        q += dq;
        clamp_limits(q);
        residual = (forward_kinematics(chain, q).position - target.position).norm();
        if (residual < best.residual) {
            best.q = q;
            best.residual = residual;
        }
        best.iterations = iter + 1;
    }
    best.converged = best.residual <= opts.tol_m;
    return best;
}

}  // namespace taskimp

#include "taskimp/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "taskimp/hashing.hpp"

namespace taskimp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ValidationError("config: missing path for " + what);
    if (!fs::exists(path)) {
        throw ValidationError("config: " + what + " file does not exist: " + path);
    }
}

Eigen::Vector2d vec2(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 2) throw ValidationError(where + " must be [x, y]");
    return {a[0].get<double>(), a[1].get<double>()};
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir,
                           const std::string& location) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(location, e.what());
    }

    RunConfig cfg;
    try {
        const auto& data = doc.at("data");
        cfg.impedance_db = resolve(base_dir, data.at("impedance_db").get<std::string>());
        cfg.gripper_db = resolve(base_dir, data.at("gripper_db").get<std::string>());
        cfg.decision_tree = resolve(base_dir, data.at("decision_tree").get<std::string>());
        cfg.fixtures = resolve(base_dir, data.at("fixtures").get<std::string>());
        cfg.chain_right = resolve(base_dir, data.at("chain_right").get<std::string>());
        cfg.chain_left = resolve(base_dir, data.at("chain_left").get<std::string>());

        if (doc.contains("embedding")) {
            const auto& emb = doc.at("embedding");
            const std::string kind = emb.value("provider", "fallback");
            if (kind == "fallback") {
                cfg.provider = ProviderKind::Fallback;
            } else if (kind == "external") {
                cfg.provider = ProviderKind::External;
            } else {
                throw ValidationError("config: embedding.provider must be fallback|external");
            }
            cfg.embedding_dimension = emb.value("dimension", std::size_t{384});
            cfg.external_embedding.url = emb.value("url", std::string{});
            cfg.external_embedding.timeout_ms = emb.value("timeout_ms", 2000);
            cfg.external_embedding.retries = emb.value("retries", 2);
        }

        if (doc.contains("environment")) {
            const auto& env = doc.at("environment");
            cfg.environment.surface_z = env.value("surface_z", 0.0);
            cfg.environment.contact_stiffness = env.value("contact_stiffness", 500.0);
            cfg.environment.contact_damping = env.value("contact_damping", 5.0);
            if (env.contains("profile")) {
                const auto& prof = env.at("profile");
                const std::string type = prof.value("type", "flat");
                if (type == "flat") {
                    cfg.environment.profile = FlatProfile{};
                } else if (type == "sine") {
                    SineProfile s;
                    s.amplitude = prof.value("amplitude", 0.02);
                    s.wavelength = prof.value("wavelength", 0.3);
                    s.x0 = prof.value("x0", 0.32);
                    cfg.environment.profile = s;
                } else if (type == "csv") {
                    const std::string path = resolve(base_dir, prof.at("path").get<std::string>());
                    require_file(path, "heightfield");
                    cfg.environment.profile = load_heightfield_csv(path, prof.value("x0", 0.32));
                } else {
                    throw ValidationError("config: profile.type must be flat|sine|csv");
                }
            }
        }

        if (doc.contains("simulation")) {
            const auto& sim = doc.at("simulation");
            cfg.simulation.dt = sim.value("dt", 0.02);
            cfg.simulation.press_depth = sim.value("press_depth", 0.01);
            cfg.simulation.glide_depth = sim.value("glide_depth", 0.001);
            cfg.simulation.poke_depth = sim.value("poke_depth", 0.005);
            cfg.simulation.button_depth = sim.value("button_depth", 0.002);
            cfg.simulation.sweep_speed = sim.value("sweep_speed", 0.05);
            cfg.simulation.sweep_length = sim.value("sweep_length", 0.2);
            cfg.simulation.lift_height = sim.value("lift_height", 0.15);
            if (sim.contains("anchor_right")) {
                cfg.simulation.anchor_right = vec2(sim.at("anchor_right"), "anchor_right");
            }
            if (sim.contains("anchor_left")) {
                cfg.simulation.anchor_left = vec2(sim.at("anchor_left"), "anchor_left");
            }
            if (sim.contains("ik")) {
                const auto& ik = sim.at("ik");
                cfg.simulation.ik.lambda = ik.value("lambda", 0.05);
                cfg.simulation.ik.max_iters = ik.value("max_iters", 200);
                cfg.simulation.ik.tol_m = ik.value("tol_m", 1e-5);
                cfg.simulation.ik.max_step_rad = ik.value("max_step_rad", 0.1);
            }
        }

        if (doc.contains("retrieval")) {
            const auto& ret = doc.at("retrieval");
            cfg.pipeline.min_score_warn = ret.value("min_score_warn", 0.2);
            if (ret.contains("gripper_actions")) {
                for (const auto& [task, action] : ret.at("gripper_actions").items()) {
                    cfg.pipeline.gripper_actions[task] =
                        gripper_action_from_string(action.get<std::string>());
                }
            }
            if (ret.contains("dual_pairs")) {
                for (const auto& [task, companion] : ret.at("dual_pairs").items()) {
                    cfg.pipeline.dual_pairs[task] = companion.get<std::string>();
                }
            }
            if (ret.contains("virtual_mass")) {
                const auto& m = ret.at("virtual_mass");
                if (!m.is_array() || m.size() != 3) {
                    throw ValidationError("config: virtual_mass must be [m_x, m_y, m_z]");
                }
                cfg.pipeline.virtual_mass = {m[0].get<double>(), m[1].get<double>(),
                                             m[2].get<double>()};
            }
        }

        if (doc.contains("evaluation")) {
            cfg.accuracy_threshold = doc.at("evaluation").value("accuracy_threshold", 13.0 / 14.0);
        }
        cfg.output_dir = resolve(base_dir, doc.value("output_dir", "out"));
    } catch (const json::exception& e) {
        throw ParseError(location, e.what());
    }

    // Validate the resolved configuration.
    require_file(cfg.impedance_db, "impedance_db");
    require_file(cfg.gripper_db, "gripper_db");
    require_file(cfg.decision_tree, "decision_tree");
    require_file(cfg.fixtures, "fixtures");
    require_file(cfg.chain_right, "chain_right");
    require_file(cfg.chain_left, "chain_left");
    if (!(cfg.simulation.dt > 0.0)) throw ValidationError("config: simulation.dt must be > 0");
    if (cfg.provider == ProviderKind::External) {
        if (cfg.external_embedding.url.find("http://") != 0 &&
            cfg.external_embedding.url.find("https://") != 0) {
            throw ValidationError("config: external embedding url must be http(s)://...");
        }
    }
    cfg.environment.validate();

    // Provenance hash over the canonical (sorted-key) serialization.
    cfg.config_hash = fnv1a64(doc.dump());
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), fs::path(path).parent_path().string(), path);
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& config) {
    if (config.provider == ProviderKind::External) {
        return std::make_unique<HttpEmbeddingProvider>(config.external_embedding,
                                                       config.embedding_dimension);
    }
    return std::make_unique<HashedBagEmbedder>(config.embedding_dimension);
}

}  // namespace taskimp

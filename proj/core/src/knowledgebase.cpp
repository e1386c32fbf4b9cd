#include "taskimp/knowledgebase.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace taskimp {

using nlohmann::json;

const char* to_string(Provenance p) {
    return p == Provenance::Paper ? "paper" : "placeholder";
}

const char* to_string(Fragility f) {
    switch (f) {
        case Fragility::Rigid: return "rigid";
        case Fragility::Soft: return "soft";
        case Fragility::Deformable: return "deformable";
        case Fragility::Fragile: return "fragile";
    }
    return "rigid";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "paper") return Provenance::Paper;
    if (s == "placeholder") return Provenance::Placeholder;
    throw ValidationError("provenance must be 'paper' or 'placeholder', got '" + s + "'");
}

Fragility fragility_from_string(const std::string& s) {
    if (s == "rigid") return Fragility::Rigid;
    if (s == "soft") return Fragility::Soft;
    if (s == "deformable") return Fragility::Deformable;
    if (s == "fragile") return Fragility::Fragile;
    throw ValidationError("fragility must be rigid|soft|deformable|fragile, got '" + s + "'");
}

bool ScenarioEntry::operator==(const ScenarioEntry& other) const {
    return task_id == other.task_id && description == other.description &&
           stiffness == other.stiffness && damping == other.damping && arm == other.arm &&
           provenance == other.provenance;
}

bool GripperEntry::operator==(const GripperEntry& other) const {
    return object_class == other.object_class && description == other.description &&
           fragility == other.fragility && angle_open == other.angle_open &&
           angle_close == other.angle_close;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_doc(const std::string& text, const std::string& location) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(location, e.what());
    }
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ValidationError(where + ": unknown field '" + key + "'");
        }
    }
}

void check_schema_version(const json& doc, const std::string& location) {
    if (!doc.contains("schema_version")) {
        throw ValidationError(location + ": missing schema_version");
    }
    const int v = doc.at("schema_version").get<int>();
    if (v != kKnowledgeBaseSchemaVersion) {
        throw ValidationError(location + ": unsupported schema_version " + std::to_string(v));
    }
}

Eigen::Vector3d positive_vec3(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 3) {
        throw ValidationError(where + " must be an array of 3 numbers");
    }
    Eigen::Vector3d v{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
    if (!v.allFinite() || (v.array() <= 0.0).any()) {
        throw ValidationError(where + " must be strictly positive");
    }
    return v;
}

std::vector<ScenarioEntry> parse_scenarios(const json& doc, const std::string& location) {
    check_schema_version(doc, location);
    require_keys(doc, {"schema_version", "scenarios"}, location);
    if (!doc.contains("scenarios") || !doc.at("scenarios").is_array()) {
        throw ValidationError(location + ": missing 'scenarios' array");
    }
    std::vector<ScenarioEntry> out;
    std::set<std::string> ids;
    for (const auto& s : doc.at("scenarios")) {
        require_keys(s, {"task_id", "description", "arm", "stiffness", "damping", "provenance"},
                     location);
        ScenarioEntry e;
        e.task_id = s.at("task_id").get<std::string>();
        if (e.task_id.empty()) throw ValidationError(location + ": task_id must be non-empty");
        if (!ids.insert(e.task_id).second) {
            throw ValidationError(location + ": duplicate task_id '" + e.task_id + "'");
        }
        e.description = s.at("description").get<std::string>();
        if (e.description.empty()) {
            throw ValidationError(location + ": scenario '" + e.task_id +
                                  "': description must be non-empty");
        }
        e.stiffness = positive_vec3(s.at("stiffness"),
                                    location + ": scenario '" + e.task_id + "': stiffness");
        e.damping = positive_vec3(s.at("damping"),
                                  location + ": scenario '" + e.task_id + "': damping");
        e.arm = arm_side_from_string(s.at("arm").get<std::string>());
        e.provenance = provenance_from_string(s.at("provenance").get<std::string>());
        out.push_back(std::move(e));
    }
    if (out.size() != kScenarioCount) {
        throw ValidationError(location + ": expected " + std::to_string(kScenarioCount) +
                              " scenarios, got " + std::to_string(out.size()));
    }
    return out;
}

std::vector<GripperEntry> parse_grippers(const json& doc, const std::string& location) {
    check_schema_version(doc, location);
    require_keys(doc, {"schema_version", "grippers"}, location);
    if (!doc.contains("grippers") || !doc.at("grippers").is_array()) {
        throw ValidationError(location + ": missing 'grippers' array");
    }
    std::vector<GripperEntry> out;
    std::set<std::string> ids;
    for (const auto& g : doc.at("grippers")) {
        require_keys(g, {"object_class", "description", "fragility", "angle_open", "angle_close"},
                     location);
        GripperEntry e;
        e.object_class = g.at("object_class").get<std::string>();
        if (e.object_class.empty()) {
            throw ValidationError(location + ": object_class must be non-empty");
        }
        if (!ids.insert(e.object_class).second) {
            throw ValidationError(location + ": duplicate object_class '" + e.object_class + "'");
        }
        e.description = g.at("description").get<std::string>();
        if (e.description.empty()) {
            throw ValidationError(location + ": gripper '" + e.object_class +
                                  "': description must be non-empty");
        }
        e.fragility = fragility_from_string(g.at("fragility").get<std::string>());
        e.angle_open = g.at("angle_open").get<double>();
        e.angle_close = g.at("angle_close").get<double>();
        if (!(e.angle_open > e.angle_close) || !(e.angle_close >= 0.0)) {
            throw ValidationError(location + ": gripper '" + e.object_class +
                                  "': requires angle_open > angle_close >= 0");
        }
        out.push_back(std::move(e));
    }
    if (out.size() != kGripperCount) {
        throw ValidationError(location + ": expected " + std::to_string(kGripperCount) +
                              " grippers, got " + std::to_string(out.size()));
    }
    return out;
}

}  // namespace

KnowledgeBase parse_knowledge_base(const std::string& impedance_json,
                                   const std::string& gripper_json,
                                   const std::string& impedance_location,
                                   const std::string& gripper_location) {
    KnowledgeBase kb;
    kb.scenarios = parse_scenarios(parse_doc(impedance_json, impedance_location),
                                   impedance_location);
    kb.grippers = parse_grippers(parse_doc(gripper_json, gripper_location), gripper_location);
    return kb;
}

KnowledgeBase load_knowledge_base(const std::string& impedance_path,
                                  const std::string& gripper_path) {
    return parse_knowledge_base(read_file(impedance_path), read_file(gripper_path),
                                impedance_path, gripper_path);
}

std::string serialize_impedance_db(const KnowledgeBase& kb) {
    json doc;
    doc["schema_version"] = kKnowledgeBaseSchemaVersion;
    doc["scenarios"] = json::array();
    for (const auto& s : kb.scenarios) {
        doc["scenarios"].push_back({{"task_id", s.task_id},
                                    {"description", s.description},
                                    {"arm", to_string(s.arm)},
                                    {"stiffness", {s.stiffness.x(), s.stiffness.y(), s.stiffness.z()}},
                                    {"damping", {s.damping.x(), s.damping.y(), s.damping.z()}},
                                    {"provenance", to_string(s.provenance)}});
    }
    return doc.dump(2);
}

std::string serialize_gripper_db(const KnowledgeBase& kb) {
    json doc;
    doc["schema_version"] = kKnowledgeBaseSchemaVersion;
    doc["grippers"] = json::array();
    for (const auto& g : kb.grippers) {
        doc["grippers"].push_back({{"object_class", g.object_class},
                                   {"description", g.description},
                                   {"fragility", to_string(g.fragility)},
                                   {"angle_open", g.angle_open},
                                   {"angle_close", g.angle_close}});
    }
    return doc.dump(2);
}

const ScenarioEntry& lookup_scenario(const KnowledgeBase& kb, const std::string& task_id) {
    for (const auto& s : kb.scenarios) {
        if (s.task_id == task_id) return s;
    }
    throw UnknownTask(task_id);
}

const GripperEntry& lookup_gripper(const KnowledgeBase& kb, const std::string& object_class) {
    for (const auto& g : kb.grippers) {
        if (g.object_class == object_class) return g;
    }
    throw UnknownTask(object_class);
}

}  // namespace taskimp

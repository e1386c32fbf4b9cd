#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "taskimp/errors.hpp"
#include "taskimp/impedance.hpp"

namespace taskimp {

enum class Provenance { Paper, Placeholder };
enum class Fragility { Rigid, Soft, Deformable, Fragile };

const char* to_string(Provenance p);
const char* to_string(Fragility f);
Provenance provenance_from_string(const std::string& s);
Fragility fragility_from_string(const std::string& s);

struct ScenarioEntry {
    std::string task_id;
    std::string description;       // the text that gets embedded
    Eigen::Vector3d stiffness{1, 1, 1};   // [K_x, K_y, K_z]
    Eigen::Vector3d damping{1, 1, 1};     // [D_x, D_y, D_z]
    ArmSide arm = ArmSide::Right;
    Provenance provenance = Provenance::Placeholder;

    bool operator==(const ScenarioEntry& other) const;
};

struct GripperEntry {
    std::string object_class;
    std::string description;
    Fragility fragility = Fragility::Rigid;
    double angle_open = 1.0;    // radians
    double angle_close = 0.3;   // the preferred grasp angle

    bool operator==(const GripperEntry& other) const;
};

struct KnowledgeBase {
    std::vector<ScenarioEntry> scenarios;   // exactly 9
    std::vector<GripperEntry> grippers;     // exactly 9

    bool operator==(const KnowledgeBase& other) const = default;
};

constexpr std::size_t kScenarioCount = 9;
constexpr std::size_t kGripperCount = 9;
constexpr int kKnowledgeBaseSchemaVersion = 1;

/// Loads and fully validates both databases; rejects rather than repairs.
KnowledgeBase load_knowledge_base(const std::string& impedance_path,
                                  const std::string& gripper_path);

KnowledgeBase parse_knowledge_base(const std::string& impedance_json,
                                   const std::string& gripper_json,
                                   const std::string& impedance_location = "impedance db",
                                   const std::string& gripper_location = "gripper db");

/// Serialized forms re-parse to an equal KnowledgeBase.
std::string serialize_impedance_db(const KnowledgeBase& kb);
std::string serialize_gripper_db(const KnowledgeBase& kb);

const ScenarioEntry& lookup_scenario(const KnowledgeBase& kb, const std::string& task_id);
const GripperEntry& lookup_gripper(const KnowledgeBase& kb, const std::string& object_class);

}  // namespace taskimp

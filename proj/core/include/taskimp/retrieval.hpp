#pragma once

#include <map>
#include <string>
#include <vector>

#include "taskimp/embedding.hpp"
#include "taskimp/knowledgebase.hpp"
#include "taskimp/perception.hpp"
#include "taskimp/vecindex.hpp"

namespace taskimp {

enum class GripperAction { Open, Close };

const char* to_string(GripperAction a);
GripperAction gripper_action_from_string(const std::string& s);

/// The full control-parameter bundle for one arm.
struct ControlParameters {
    ImpedanceParams impedance;
    ScenarioEntry scenario;
    GripperEntry gripper;
    GripperAction gripper_action = GripperAction::Close;
    double stage1_score = 0.0;  // label -> scenario cosine
    double stage2_score = 0.0;  // (scenario + label) -> gripper cosine
};

struct RetrievalIndexes {
    FlatIndex scenarios;
    FlatIndex grippers;
};

/// One vector per scenario description and per gripper description;
/// ids are task_id / object_class.
RetrievalIndexes build_indexes(const KnowledgeBase& kb, const EmbeddingProvider& provider);

std::pair<ScenarioEntry, double> retrieve_impedance(const TaskLabel& label,
                                                    const FlatIndex& scenario_index,
                                                    const KnowledgeBase& kb,
                                                    const EmbeddingProvider& provider);

/// Stage-2 query text is the scenario description, a space, then the label.
std::string build_stage2_query(const ScenarioEntry& scenario, const TaskLabel& label);

std::pair<GripperEntry, double> retrieve_gripper(const ScenarioEntry& scenario,
                                                 const TaskLabel& label,
                                                 const FlatIndex& gripper_index,
                                                 const KnowledgeBase& kb,
                                                 const EmbeddingProvider& provider);

struct PipelineConfig {
    std::map<std::string, GripperAction> gripper_actions;  // task_id -> action
    std::map<std::string, std::string> dual_pairs;         // task_id -> companion task_id
    Eigen::Vector3d virtual_mass{1.0, 1.0, 1.0};
    double min_score_warn = 0.2;
};

struct PipelineResult {
    TaskLabel label;
    std::vector<ControlParameters> arms;  // one entry, or two for dual tasks
    std::vector<std::string> warnings;
};

/// Both retrieval stages for a given label, plus the companion arm for dual
/// tasks. Errors are rethrown as PipelineError annotated with the stage.
PipelineResult retrieve_from_label(const TaskLabel& label, const KnowledgeBase& kb,
                                   const RetrievalIndexes& indexes,
                                   const EmbeddingProvider& provider, const PipelineConfig& cfg);

/// infer_task -> retrieve_impedance -> retrieve_gripper, assembled per arm.
/// Errors are rethrown as PipelineError annotated with the failing stage.
PipelineResult run_pipeline(const ImageRef& image, VlmClient& client, const DecisionTree& tree,
                            const KnowledgeBase& kb, const RetrievalIndexes& indexes,
                            const EmbeddingProvider& provider, const PipelineConfig& cfg);

struct RetrievalRecord {
    std::string image_uri;
    std::string expected_task_id;
    std::string expected_object_class;
    std::string inferred_task;
    std::string retrieved_scenario;
    std::string retrieved_gripper;
    double stage1_score = 0.0;
    double stage2_score = 0.0;
    bool correct = false;
    std::string error;  // non-empty when the pipeline failed for this fixture
};

struct RetrievalReport {
    std::vector<RetrievalRecord> records;  // sorted by image_uri
    std::size_t correct_count = 0;
    double accuracy = 0.0;
};

/// Runs the pipeline per fixture. A fixture counts as correct only when the
/// inferred task, the retrieved scenario, and the retrieved gripper all
/// match the fixture's expectations; pipeline failures count as incorrect.
RetrievalReport evaluate_retrieval(const std::vector<FixtureRecord>& fixtures, VlmClient& client,
                                   const DecisionTree& tree, const KnowledgeBase& kb,
                                   const RetrievalIndexes& indexes,
                                   const EmbeddingProvider& provider, const PipelineConfig& cfg);

std::string report_to_json(const RetrievalReport& report);

/// Two-column CSV (category,count) with correct/incorrect rows.
std::string report_to_counts_csv(const RetrievalReport& report);

std::string control_parameters_to_json(const PipelineResult& result);

}  // namespace taskimp

#include "taskimp/retrieval.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace taskimp {

using nlohmann::json;

const char* to_string(GripperAction a) {
    return a == GripperAction::Open ? "open" : "close";
}

GripperAction gripper_action_from_string(const std::string& s) {
    if (s == "open") return GripperAction::Open;
    if (s == "close") return GripperAction::Close;
    throw ValidationError("gripper action must be open|close, got '" + s + "'");
}

RetrievalIndexes build_indexes(const KnowledgeBase& kb, const EmbeddingProvider& provider) {
    RetrievalIndexes out{FlatIndex(provider.dimension()), FlatIndex(provider.dimension())};
    for (const auto& s : kb.scenarios) {
        out.scenarios.add(s.task_id, embed_text(provider, s.description));
    }
    for (const auto& g : kb.grippers) {
        out.grippers.add(g.object_class, embed_text(provider, g.description));
    }
    return out;
}

std::pair<ScenarioEntry, double> retrieve_impedance(const TaskLabel& label,
                                                    const FlatIndex& scenario_index,
                                                    const KnowledgeBase& kb,
                                                    const EmbeddingProvider& provider) {
    const auto hits = scenario_index.search(embed_text(provider, label.text), 1);
    return {lookup_scenario(kb, hits[0].id), hits[0].score};
}

std::string build_stage2_query(const ScenarioEntry& scenario, const TaskLabel& label) {
    return scenario.description + " " + label.text;
}

std::pair<GripperEntry, double> retrieve_gripper(const ScenarioEntry& scenario,
                                                 const TaskLabel& label,
                                                 const FlatIndex& gripper_index,
                                                 const KnowledgeBase& kb,
                                                 const EmbeddingProvider& provider) {
    const auto hits =
        gripper_index.search(embed_text(provider, build_stage2_query(scenario, label)), 1);
    return {lookup_gripper(kb, hits[0].id), hits[0].score};
}

namespace {

GripperAction action_for(const PipelineConfig& cfg, const std::string& task_id) {
    const auto it = cfg.gripper_actions.find(task_id);
    return it == cfg.gripper_actions.end() ? GripperAction::Close : it->second;
}

ControlParameters assemble(const ScenarioEntry& scenario, const GripperEntry& gripper,
                           double s1, double s2, const PipelineConfig& cfg) {
    ControlParameters p;
    p.impedance.mass = cfg.virtual_mass;
    p.impedance.stiffness = scenario.stiffness;
    p.impedance.damping = scenario.damping;
    p.impedance.validate();
    p.scenario = scenario;
    p.gripper = gripper;
    p.gripper_action = action_for(cfg, scenario.task_id);
    p.stage1_score = s1;
    p.stage2_score = s2;
    return p;
}

}  // namespace

PipelineResult retrieve_from_label(const TaskLabel& label, const KnowledgeBase& kb,
                                   const RetrievalIndexes& indexes,
                                   const EmbeddingProvider& provider, const PipelineConfig& cfg) {
    PipelineResult result;
    result.label = label;

    ScenarioEntry scenario;
    double s1 = 0.0;
    try {
        std::tie(scenario, s1) =
            retrieve_impedance(result.label, indexes.scenarios, kb, provider);
    } catch (const std::exception& e) {
        throw PipelineError("impedance retrieval", e.what());
    }

    GripperEntry gripper;
    double s2 = 0.0;
    try {
        std::tie(gripper, s2) =
            retrieve_gripper(scenario, result.label, indexes.grippers, kb, provider);
    } catch (const std::exception& e) {
        throw PipelineError("gripper retrieval", e.what());
    }

    result.arms.push_back(assemble(scenario, gripper, s1, s2, cfg));

    const auto companion_it = cfg.dual_pairs.find(scenario.task_id);
    if (companion_it != cfg.dual_pairs.end()) {
        try {
            const ScenarioEntry& companion = lookup_scenario(kb, companion_it->second);
            const double cs1 = cosine(embed_text(provider, result.label.text),
                                      embed_text(provider, companion.description));
            const auto [cgrip, cs2] =
                retrieve_gripper(companion, result.label, indexes.grippers, kb, provider);
            result.arms.push_back(assemble(companion, cgrip, cs1, cs2, cfg));
        } catch (const std::exception& e) {
            throw PipelineError("companion retrieval", e.what());
        }
    }

    for (const auto& arm : result.arms) {
        if (std::min(arm.stage1_score, arm.stage2_score) < cfg.min_score_warn) {
            std::ostringstream msg;
            msg << "low-confidence retrieval for '" << arm.scenario.task_id
                << "': stage1=" << arm.stage1_score << " stage2=" << arm.stage2_score
                << " (threshold " << cfg.min_score_warn << ")";
            result.warnings.push_back(msg.str());
        }
    }
    return result;
}

PipelineResult run_pipeline(const ImageRef& image, VlmClient& client, const DecisionTree& tree,
                            const KnowledgeBase& kb, const RetrievalIndexes& indexes,
                            const EmbeddingProvider& provider, const PipelineConfig& cfg) {
    TaskLabel label;
    try {
        label = infer_task(client, image, tree);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("perception", e.what());
    }
    return retrieve_from_label(label, kb, indexes, provider, cfg);
}

RetrievalReport evaluate_retrieval(const std::vector<FixtureRecord>& fixtures, VlmClient& client,
                                   const DecisionTree& tree, const KnowledgeBase& kb,
                                   const RetrievalIndexes& indexes,
                                   const EmbeddingProvider& provider, const PipelineConfig& cfg) {
    if (fixtures.empty()) throw ParseError("fixtures", "no fixtures");
    RetrievalReport report;
    for (const auto& fixture : fixtures) {
        RetrievalRecord record;
        record.image_uri = fixture.image_uri;
        record.expected_task_id = fixture.expected_task_id;
        record.expected_object_class = fixture.expected_object_class;
        try {
            const PipelineResult result =
                run_pipeline(ImageRef{fixture.image_uri}, client, tree, kb, indexes, provider, cfg);
            const ControlParameters& primary = result.arms.front();
            record.inferred_task = result.label.task_id;
            record.retrieved_scenario = primary.scenario.task_id;
            record.retrieved_gripper = primary.gripper.object_class;
            record.stage1_score = primary.stage1_score;
            record.stage2_score = primary.stage2_score;
            record.correct = record.inferred_task == fixture.expected_task_id &&
                             record.retrieved_scenario == fixture.expected_task_id &&
                             record.retrieved_gripper == fixture.expected_object_class;
        } catch (const PipelineError& e) {
            record.error = e.what();
            record.correct = false;
        }
        report.records.push_back(std::move(record));
    }
    std::sort(report.records.begin(), report.records.end(),
              [](const RetrievalRecord& a, const RetrievalRecord& b) {
                  return a.image_uri < b.image_uri;
              });
    report.correct_count = static_cast<std::size_t>(
        std::count_if(report.records.begin(), report.records.end(),
                      [](const RetrievalRecord& r) { return r.correct; }));
    report.accuracy =
        static_cast<double>(report.correct_count) / static_cast<double>(report.records.size());
    return report;
}

std::string report_to_json(const RetrievalReport& report) {
    json doc;
    doc["schema_version"] = 1;
    doc["accuracy"] = report.accuracy;
    doc["correct"] = report.correct_count;
    doc["total"] = report.records.size();
    doc["records"] = json::array();
    for (const auto& r : report.records) {
        json rec{{"image_uri", r.image_uri},
                 {"expected_task_id", r.expected_task_id},
                 {"expected_object_class", r.expected_object_class},
                 {"inferred_task", r.inferred_task},
                 {"retrieved_scenario", r.retrieved_scenario},
                 {"retrieved_gripper", r.retrieved_gripper},
                 {"stage1_score", r.stage1_score},
                 {"stage2_score", r.stage2_score},
                 {"correct", r.correct}};
        if (!r.error.empty()) rec["error"] = r.error;
        doc["records"].push_back(rec);
    }
    return doc.dump(2);
}

std::string report_to_counts_csv(const RetrievalReport& report) {
    std::ostringstream out;
    out << "category,count\n";
    out << "correct," << report.correct_count << "\n";
    out << "incorrect," << (report.records.size() - report.correct_count) << "\n";
    return out.str();
}

namespace {

json params_to_json(const ControlParameters& p) {
    return json{
        {"arm", to_string(p.scenario.arm)},
        {"task_id", p.scenario.task_id},
        {"stiffness", {p.impedance.stiffness.x(), p.impedance.stiffness.y(),
                       p.impedance.stiffness.z()}},
        {"damping", {p.impedance.damping.x(), p.impedance.damping.y(), p.impedance.damping.z()}},
        {"mass", {p.impedance.mass.x(), p.impedance.mass.y(), p.impedance.mass.z()}},
        {"gripper",
         {{"object_class", p.gripper.object_class},
          {"fragility", to_string(p.gripper.fragility)},
          {"angle_open", p.gripper.angle_open},
          {"angle_close", p.gripper.angle_close}}},
        {"gripper_action", to_string(p.gripper_action)},
        {"scores", {{"stage1", p.stage1_score}, {"stage2", p.stage2_score}}}};
}

}  // namespace

std::string control_parameters_to_json(const PipelineResult& result) {
    json doc;
    doc["schema_version"] = 1;
    doc["task_id"] = result.label.task_id;
    doc["label_text"] = result.label.text;
    doc["query_trace"] = json::array();
    for (const auto& [q, a] : result.label.query_trace) {
        doc["query_trace"].push_back({{"question", q}, {"answer", a}});
    }
    doc["arms"] = json::array();
    for (const auto& arm : result.arms) {
        doc["arms"].push_back(params_to_json(arm));
    }
    return doc.dump(2);
}

}  // namespace taskimp

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "taskimp/config.hpp"
#include "taskimp/hashing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taskimp;

namespace {

// Exit codes: 0 ok, 1 threshold not met, 2 load/validation, 3 retrieval
// pipeline, 4 simulation abort.
constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitLoad = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitSimulation = 4;

struct LoadedStack {
    RunConfig config;
    KnowledgeBase kb;
    DecisionTree tree;
    std::vector<FixtureRecord> fixtures;
    std::unique_ptr<EmbeddingProvider> provider;
    RetrievalIndexes indexes{FlatIndex(1), FlatIndex(1)};
};

LoadedStack load_stack(const std::string& config_path) {
    LoadedStack s;
    s.config = load_run_config(config_path);
    s.kb = load_knowledge_base(s.config.impedance_db, s.config.gripper_db);
    s.tree = load_decision_tree(s.config.decision_tree);
    validate_tree(s.tree, s.kb);
    s.fixtures = load_fixtures(s.config.fixtures);
    validate_fixture_references(s.fixtures, s.kb);
    s.provider = make_provider(s.config);
    s.indexes = build_indexes(s.kb, *s.provider);
    return s;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string index_to_json(const FlatIndex& index) {
    json doc;
    doc["schema_version"] = 1;
    doc["dimension"] = index.dimension();
    doc["entries"] = json::array();
    for (const auto& e : index.entries()) {
        doc["entries"].push_back({{"id", e.id}, {"vector", e.vector.values()}});
    }
    return doc.dump();
}

int cmd_build_index(const std::string& config_path) {
    LoadedStack s = load_stack(config_path);
    const fs::path out_dir(s.config.output_dir);
    write_file(out_dir / "scenario_index.json", index_to_json(s.indexes.scenarios));
    write_file(out_dir / "gripper_index.json", index_to_json(s.indexes.grippers));

    json summary;
    summary["scenarios"] = s.indexes.scenarios.size();
    summary["grippers"] = s.indexes.grippers.size();
    summary["config_hash"] = hash_hex(s.config.config_hash);
    std::cout << summary.dump() << "\n";
    std::cerr << "indexes written to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_retrieve(const std::string& config_path, const std::string& image_uri,
                 const std::string& vlm_url) {
    LoadedStack s = load_stack(config_path);

    std::unique_ptr<VlmClient> client;
    if (vlm_url.empty()) {
        client = std::make_unique<ScriptedVlmClient>(s.fixtures);
    } else {
        HttpVlmOptions opts;
        opts.url = vlm_url;
        client = std::make_unique<HttpVlmClient>(opts);
    }

    PipelineResult result;
    try {
        result = run_pipeline(ImageRef{image_uri}, *client, s.tree, s.kb, s.indexes, *s.provider,
                              s.config.pipeline);
    } catch (const PipelineError& e) {
        std::cerr << "retrieve failed at " << e.what() << "\n";
        return kExitPipeline;
    }

    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (vlm_url.empty()) {
        // Mock mode knows the fixture's expectation; surface disagreements.
        if (const FixtureRecord* fx =
                static_cast<ScriptedVlmClient*>(client.get())->find(image_uri)) {
            if (!fx->expected_task_id.empty() && fx->expected_task_id != result.label.task_id) {
                std::cerr << "warning: low-confidence inference: task '" << result.label.task_id
                          << "' does not match fixture expectation '" << fx->expected_task_id
                          << "'\n";
            }
        }
    }
    std::cout << control_parameters_to_json(result) << "\n";
    return kExitOk;
}

int cmd_eval_retrieval(const std::string& config_path, double threshold_override) {
    LoadedStack s = load_stack(config_path);
    ScriptedVlmClient client(s.fixtures);
    const RetrievalReport report = evaluate_retrieval(s.fixtures, client, s.tree, s.kb, s.indexes,
                                                      *s.provider, s.config.pipeline);

    const fs::path out_dir(s.config.output_dir);
    write_file(out_dir / "retrieval_report.json", report_to_json(report));
    write_file(out_dir / "retrieval_counts.csv", report_to_counts_csv(report));

    const double threshold =
        threshold_override >= 0.0 ? threshold_override : s.config.accuracy_threshold;
    json summary;
    summary["accuracy"] = report.accuracy;
    summary["correct"] = report.correct_count;
    summary["total"] = report.records.size();
    summary["threshold"] = threshold;
    summary["passed"] = report.accuracy >= threshold;
    summary["config_hash"] = hash_hex(s.config.config_hash);
    std::cout << summary.dump() << "\n";
    std::cerr << "accuracy: " << report.accuracy << " (" << report.correct_count << "/"
              << report.records.size() << ")\n";
    return report.accuracy >= threshold ? kExitOk : kExitThreshold;
}

struct ArmRun {
    std::string task_id;
    ControlParameters params;
    ScenarioResult scenario;
    TaskMetrics metrics;
};

int simulate_task(const LoadedStack& s, const std::string& task_id, bool primary_arm_only,
                  std::vector<ArmRun>& runs) {
    PipelineResult retrieved;
    try {
        retrieved = retrieve_from_label(TaskLabel::from_task(task_id), s.kb, s.indexes,
                                        *s.provider, s.config.pipeline);
    } catch (const PipelineError& e) {
        std::cerr << "retrieval failed at " << e.what() << "\n";
        return kExitPipeline;
    }
    for (const auto& w : retrieved.warnings) std::cerr << "warning: " << w << "\n";

    const fs::path out_dir(s.config.output_dir);
    int exit_code = kExitOk;
    for (const auto& params : retrieved.arms) {
        if (primary_arm_only && params.scenario.task_id != task_id) continue;
        const std::string run_task = params.scenario.task_id;
        const KinematicChain chain = load_chain(
            params.scenario.arm == ArmSide::Left ? s.config.chain_left : s.config.chain_right);

        ArmRun run;
        run.task_id = run_task;
        run.params = params;
        run.scenario = run_scenario(run_task, params, chain, s.config.environment,
                                    s.config.simulation);

        const std::string stem =
            run_task + "_" + to_string(params.scenario.arm);
        write_file(out_dir / (stem + ".trace.csv"), trace_to_csv(run.scenario.trace));

        json manifest;
        manifest["schema_version"] = 1;
        manifest["task_id"] = run_task;
        manifest["arm"] = to_string(params.scenario.arm);
        manifest["K"] = {params.impedance.stiffness.x(), params.impedance.stiffness.y(),
                         params.impedance.stiffness.z()};
        manifest["D"] = {params.impedance.damping.x(), params.impedance.damping.y(),
                         params.impedance.damping.z()};
        manifest["gripper"] = params.gripper.object_class;
        manifest["gripper_action"] = to_string(params.gripper_action);
        manifest["config_hash"] = hash_hex(s.config.config_hash);
        manifest["status"] = run.scenario.status == ScenarioStatus::Ok ? "ok" : "aborted";
        if (!run.scenario.message.empty()) manifest["message"] = run.scenario.message;
        write_file(out_dir / (stem + ".manifest.json"), manifest.dump(2));

        if (run.scenario.status != ScenarioStatus::Ok) {
            std::cerr << "simulation aborted (" << run_task << "): " << run.scenario.message
                      << " (partial trace written)\n";
            exit_code = kExitSimulation;
            runs.push_back(std::move(run));
            continue;
        }
        run.metrics = compute_metrics(run.scenario.trace);
        write_file(out_dir / (stem + ".metrics.json"),
                   metrics_to_json(run_task, params.scenario.arm, params, run.metrics));
        std::cout << json::parse(metrics_to_json(run_task, params.scenario.arm, params,
                                                 run.metrics))
                         .dump()
                  << "\n";
        runs.push_back(std::move(run));
    }
    return exit_code;
}

int cmd_simulate(const std::string& config_path, const std::string& task_id, bool all) {
    LoadedStack s = load_stack(config_path);
    std::vector<ArmRun> runs;
    int exit_code = kExitOk;

    if (all) {
        for (const auto& scenario : s.kb.scenarios) {
            if (scenario.provenance != Provenance::Paper) continue;
            const int rc = simulate_task(s, scenario.task_id, /*primary_arm_only=*/true, runs);
            if (rc != kExitOk) exit_code = rc;
        }
        std::ostringstream summary;
        summary << "task,arm,K_z,D_z,mean_abs_e_z,max_abs_e_z,max_abs_F_virt_z\n";
        for (const auto& run : runs) {
            if (run.scenario.status != ScenarioStatus::Ok) continue;
            summary << run.task_id << "," << to_string(run.params.scenario.arm) << ","
                    << run.params.impedance.stiffness.z() << ","
                    << run.params.impedance.damping.z() << "," << run.metrics.mean_abs_e_z << ","
                    << run.metrics.max_abs_e_z << "," << run.metrics.max_abs_f_virt_z << "\n";
        }
        write_file(fs::path(s.config.output_dir) / "summary.csv", summary.str());
        return exit_code;
    }

    lookup_scenario(s.kb, task_id);  // UnknownTask -> load error below
    return simulate_task(s, task_id, /*primary_arm_only=*/false, runs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic retrieval of impedance parameters driving a task-space "
                 "impedance simulation"};
    app.require_subcommand(1);

    std::string config_path = "data/config.json";
    app.add_option("-c,--config", config_path, "path to the run configuration JSON")
        ->capture_default_str();

    auto* build = app.add_subcommand("build-index", "build and serialize both retrieval indexes");

    std::string image_uri;
    std::string vlm_url;
    auto* retrieve = app.add_subcommand("retrieve",
                                        "run the full pipeline for one image and print the "
                                        "retrieved control parameters as JSON");
    retrieve->add_option("-i,--image", image_uri, "image uri (fixture id in mock mode)")
        ->required();
    retrieve->add_option("--vlm-url", vlm_url,
                         "use a live VLM endpoint instead of the scripted fixture client");

    double threshold_override = -1.0;
    auto* eval = app.add_subcommand("eval-retrieval",
                                    "evaluate retrieval over the fixture suite and write the "
                                    "report");
    eval->add_option("--threshold", threshold_override,
                     "override the configured accuracy threshold");

    std::string task_id;
    bool all = false;
    auto* simulate = app.add_subcommand("simulate",
                                        "retrieve parameters for a task and run the scenario "
                                        "simulation");
    simulate->add_option("-t,--task", task_id, "task id to simulate");
    simulate->add_flag("--all", all, "simulate every paper-provenance task and write summary.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) return cmd_build_index(config_path);
        if (*retrieve) return cmd_retrieve(config_path, image_uri, vlm_url);
        if (*eval) return cmd_eval_retrieval(config_path, threshold_override);
        if (*simulate) {
            if (!all && task_id.empty()) {
                std::cerr << "simulate requires --task or --all\n";
                return kExitLoad;
            }
            return cmd_simulate(config_path, task_id, all);
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitLoad;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitLoad;
    } catch (const UnknownTask& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitLoad;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLoad;
    }
    return kExitOk;
}

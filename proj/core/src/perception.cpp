#include "taskimp/perception.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace taskimp {

using nlohmann::json;

const char* to_string(VlmAnswer a) {
    switch (a) {
        case VlmAnswer::Yes: return "yes";
        case VlmAnswer::No: return "no";
        case VlmAnswer::Unsure: return "unsure";
    }
    return "unsure";
}

VlmAnswer vlm_answer_from_string(const std::string& s) {
    if (s == "yes") return VlmAnswer::Yes;
    if (s == "no") return VlmAnswer::No;
    if (s == "unsure") return VlmAnswer::Unsure;
    throw ValidationError("answer must be yes|no|unsure, got '" + s + "'");
}

namespace {

void collect_leaves(const DecisionTree::Node* node, std::vector<std::string>& out) {
    if (!node) return;
    if (node->is_leaf()) {
        out.push_back(node->task_id);
        return;
    }
    collect_leaves(node->yes.get(), out);
    collect_leaves(node->no.get(), out);
}

std::size_t depth_of(const DecisionTree::Node* node) {
    if (!node || node->is_leaf()) return 0;
    return 1 + std::max(depth_of(node->yes.get()), depth_of(node->no.get()));
}

std::unique_ptr<DecisionTree::Node> parse_node(const json& j, const std::string& location) {
    auto node = std::make_unique<DecisionTree::Node>();
    if (j.contains("task_id")) {
        node->task_id = j.at("task_id").get<std::string>();
        if (node->task_id.empty()) throw ValidationError(location + ": leaf task_id empty");
        if (j.size() != 1) {
            throw ValidationError(location + ": leaf nodes carry only 'task_id'");
        }
        return node;
    }
    if (!j.contains("question") || !j.contains("yes") || !j.contains("no")) {
        throw ValidationError(location + ": internal nodes need question/yes/no");
    }
    node->question = j.at("question").get<std::string>();
    if (node->question.empty()) throw ValidationError(location + ": question empty");
    node->yes = parse_node(j.at("yes"), location);
    node->no = parse_node(j.at("no"), location);
    return node;
}

}  // namespace

std::vector<std::string> DecisionTree::leaf_task_ids() const {
    std::vector<std::string> out;
    collect_leaves(root.get(), out);
    return out;
}

std::size_t DecisionTree::max_depth() const {
    return depth_of(root.get());
}

DecisionTree parse_decision_tree(const std::string& json_text, const std::string& location) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(location, e.what());
    }
    DecisionTree tree;
    tree.root = parse_node(doc, location);
    return tree;
}

DecisionTree load_decision_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open decision tree file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_decision_tree(ss.str(), path);
}

void validate_tree(const DecisionTree& tree, const KnowledgeBase& kb) {
    if (!tree.root) throw ValidationError("decision tree has no root");
    const auto leaves = tree.leaf_task_ids();
    if (leaves.size() != kScenarioCount) {
        throw ValidationError("decision tree must have exactly " +
                              std::to_string(kScenarioCount) + " leaves, has " +
                              std::to_string(leaves.size()));
    }
    std::set<std::string> leaf_set(leaves.begin(), leaves.end());
    if (leaf_set.size() != leaves.size()) {
        throw ValidationError("decision tree leaf task ids must be unique");
    }
    for (const auto& s : kb.scenarios) {
        if (!leaf_set.count(s.task_id)) {
            throw ValidationError("decision tree is missing a leaf for task '" + s.task_id + "'");
        }
    }
    if (tree.max_depth() > kMaxTreeDepth) {
        throw ValidationError("decision tree depth " + std::to_string(tree.max_depth()) +
                              " exceeds the bound of " + std::to_string(kMaxTreeDepth));
    }
}

TaskLabel TaskLabel::from_task(const std::string& task_id) {
    TaskLabel out;
    out.task_id = task_id;
    out.text = task_id;
    std::replace(out.text.begin(), out.text.end(), '_', ' ');
    return out;
}

TaskLabel TaskLabel::from_text(const std::string& text) {
    TaskLabel out;
    out.text = text;
    return out;
}

TaskLabel infer_task(VlmClient& client, const ImageRef& image, const DecisionTree& tree) {
    if (!tree.root) throw ValidationError("decision tree has no root");
    const DecisionTree::Node* node = tree.root.get();
    std::vector<std::pair<std::string, std::string>> trace;
    while (!node->is_leaf()) {
        const VlmAnswer answer = client.ask(image, node->question);
        if (answer == VlmAnswer::Unsure) throw UnsureAnswer(node->question);
        trace.emplace_back(node->question, to_string(answer));
        node = answer == VlmAnswer::Yes ? node->yes.get() : node->no.get();
    }
    TaskLabel label = TaskLabel::from_task(node->task_id);
    label.query_trace = std::move(trace);
    return label;
}

std::vector<FixtureRecord> parse_fixtures(const std::string& json_text,
                                          const std::string& location) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(location, e.what());
    }
    if (!doc.contains("fixtures") || !doc.at("fixtures").is_array()) {
        throw ParseError(location, "missing 'fixtures' array");
    }
    std::vector<FixtureRecord> out;
    std::set<std::string> uris;
    for (const auto& f : doc.at("fixtures")) {
        FixtureRecord r;
        r.image_uri = f.at("image_uri").get<std::string>();
        if (r.image_uri.empty()) throw ParseError(location, "fixture image_uri empty");
        if (!uris.insert(r.image_uri).second) {
            throw ParseError(location, "duplicate fixture image_uri '" + r.image_uri + "'");
        }
        for (const auto& [question, answer] : f.at("answers").items()) {
            r.answers[question] = vlm_answer_from_string(answer.get<std::string>());
        }
        r.expected_task_id = f.at("expected_task_id").get<std::string>();
        r.expected_object_class = f.at("expected_object_class").get<std::string>();
        out.push_back(std::move(r));
    }
    if (out.empty()) throw ParseError(location, "no fixtures");
    return out;
}

std::vector<FixtureRecord> load_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open fixture file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fixtures(ss.str(), path);
}

void validate_fixture_references(const std::vector<FixtureRecord>& fixtures,
                                 const KnowledgeBase& kb) {
    for (const auto& f : fixtures) {
        lookup_scenario(kb, f.expected_task_id);
        lookup_gripper(kb, f.expected_object_class);
    }
}

ScriptedVlmClient::ScriptedVlmClient(std::vector<FixtureRecord> fixtures)
    : fixtures_(std::move(fixtures)) {}

const FixtureRecord* ScriptedVlmClient::find(const std::string& image_uri) const {
    for (const auto& f : fixtures_) {
        if (f.image_uri == image_uri) return &f;
    }
    return nullptr;
}

VlmAnswer ScriptedVlmClient::ask(const ImageRef& image, const std::string& question) {
    const FixtureRecord* fixture = find(image.uri);
    if (!fixture) throw Error("fixture not found: " + image.uri);
    const auto it = fixture->answers.find(question);
    if (it == fixture->answers.end()) return VlmAnswer::Unsure;
    return it->second;
}

ScriptedVlmClient scripted_vlm_from_fixture(const std::string& fixture_path) {
    return ScriptedVlmClient(load_fixtures(fixture_path));
}

}  // namespace taskimp

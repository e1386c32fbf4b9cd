#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "taskimp/errors.hpp"
#include "taskimp/knowledgebase.hpp"

namespace taskimp {

struct ImageRef {
    std::string uri;
};

enum class VlmAnswer { Yes, No, Unsure };

const char* to_string(VlmAnswer a);
VlmAnswer vlm_answer_from_string(const std::string& s);

/// Seam for the visual question answering backend. Implementations must be
/// deterministic for a fixed (image, question) pair within one run.
class VlmClient {
public:
    virtual ~VlmClient() = default;
    virtual VlmAnswer ask(const ImageRef& image, const std::string& question) = 0;
};

/// Binary yes/no decision tree; internal nodes carry a question, leaves a
/// task id. yes -> left branch, no -> right branch.
struct DecisionTree {
    struct Node {
        std::string question;            // empty for leaves
        std::string task_id;             // empty for internal nodes
        std::unique_ptr<Node> yes;
        std::unique_ptr<Node> no;
        bool is_leaf() const { return !task_id.empty(); }
    };
    std::unique_ptr<Node> root;

    std::vector<std::string> leaf_task_ids() const;
    std::size_t max_depth() const;  // questions on the longest root-to-leaf path
};

constexpr std::size_t kMaxTreeDepth = 5;

DecisionTree load_decision_tree(const std::string& path);
DecisionTree parse_decision_tree(const std::string& json_text, const std::string& location);

/// Exactly 9 leaves, task ids bijective with the knowledge base's scenario
/// ids, every path at most 5 questions deep.
void validate_tree(const DecisionTree& tree, const KnowledgeBase& kb);

struct TaskLabel {
    std::string task_id;   // empty for free-text labels
    std::string text;      // the query text embedded by retrieval
    std::vector<std::pair<std::string, std::string>> query_trace;  // (question, answer)

    static TaskLabel from_task(const std::string& task_id);
    static TaskLabel from_text(const std::string& text);
};

/// Traverses the tree asking the client each node's question. Throws
/// UnsureAnswer when the client cannot decide a branch.
TaskLabel infer_task(VlmClient& client, const ImageRef& image, const DecisionTree& tree);

struct FixtureRecord {
    std::string image_uri;
    std::map<std::string, VlmAnswer> answers;
    std::string expected_task_id;
    std::string expected_object_class;
};

std::vector<FixtureRecord> load_fixtures(const std::string& path);
std::vector<FixtureRecord> parse_fixtures(const std::string& json_text,
                                          const std::string& location);

/// Every fixture's expectations must resolve against the knowledge base.
void validate_fixture_references(const std::vector<FixtureRecord>& fixtures,
                                 const KnowledgeBase& kb);

/// Answers from a fixture map; unmapped questions answer "unsure", unknown
/// image uris raise an error.
class ScriptedVlmClient final : public VlmClient {
public:
    explicit ScriptedVlmClient(std::vector<FixtureRecord> fixtures);

    VlmAnswer ask(const ImageRef& image, const std::string& question) override;

    const std::vector<FixtureRecord>& fixtures() const { return fixtures_; }
    const FixtureRecord* find(const std::string& image_uri) const;

private:
    std::vector<FixtureRecord> fixtures_;
};

ScriptedVlmClient scripted_vlm_from_fixture(const std::string& fixture_path);

struct HttpVlmOptions {
    std::string url;  // e.g. http://host:port/ask
    int timeout_ms = 5000;
    int retries = 1;
};

/// Adapter for a live model behind a documented endpoint:
/// POST {"image_b64": ..., "question": ...} -> {"answer": "yes"|"no"|"unsure"}.
/// If the image uri names a readable file its bytes are encoded, otherwise
/// the uri string itself is.
class HttpVlmClient final : public VlmClient {
public:
    explicit HttpVlmClient(HttpVlmOptions options);
    VlmAnswer ask(const ImageRef& image, const std::string& question) override;

private:
    HttpVlmOptions options_;
};

}  // namespace taskimp

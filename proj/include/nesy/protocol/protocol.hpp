#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/engine.hpp"
#include "nesy/errors.hpp"
#include "nesy/harness/trajectory.hpp"
#include "nesy/vertex/score.hpp"

namespace nesy::protocol {

struct Task {
    std::string id;
    std::string instruction;
    std::optional<std::string> capability;  // expected capability name
    std::vector<std::string> references;    // expected output samples
    std::vector<Task> subtasks;

    nlohmann::json to_json() const;
    static Task from_json(const nlohmann::json& j);
};

/// Ordered task queue plus the goal it serves.
struct Plan {
    std::string goal;
    std::vector<Task> tasks;

    /// Throws ConfigError on duplicate ids (at any depth) or an empty instruction.
    void validate() const;
    /// Depth-first preorder: each task precedes its subtasks.
    std::vector<Task> flatten() const;
    /// "1. first\n2. second" over the top-level tasks.
    std::string render() const;

    nlohmann::json to_json() const;
    static Plan from_json(const nlohmann::json& j);
    static Plan load(const std::filesystem::path& path);
};

/// Engine output that is not a numbered plan. Keeps the raw text.
class PlanFormatError : public FormatError {
public:
    PlanFormatError(const std::string& what, std::string raw)
        : FormatError(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

using Executor = std::function<std::string(const std::string& instruction)>;

struct Capability {
    std::string name;
    std::string description;
    Executor executor;
};

class CapabilityRegistry {
public:
    /// ConfigError on a duplicate or empty name.
    void add(Capability c);
    const Capability* find(std::string_view name) const;
    const std::vector<Capability>& all() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::vector<std::string> names() const;

private:
    std::vector<Capability> items_;
};

struct CompletedTask {
    Task task;
    std::string result;
};

struct MemoryBuffer {
    std::string goal;
    std::vector<Task> tasks;  // everything unfolded so far, in order
    std::vector<CompletedTask> completed;
    std::deque<Task> pending;
    std::optional<std::string> last_failure;
    std::size_t selection_failures = 0;

    bool is_pending(std::string_view id) const;
    bool is_completed(std::string_view id) const;
    /// Goal, task list and progress as shown to the engine.
    std::string describe() const;
};

enum class Stage { plan, capability, task };

std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view name);

struct StageScore {
    Stage stage;
    vertex::NodeScore score;
};

/// Append-only list of tagged node scores.
class Aggregator {
public:
    void append(Stage stage, const vertex::NodeScore& s) { entries_.push_back({stage, s}); }
    const std::vector<StageScore>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<StageScore> entries_;
};

/// Serializable part of a protocol run. Executors and engines live in the
/// Session and are re-attached on reload.
struct ProtocolState {
    Plan expected;
    std::vector<std::string> capability_names;
    MemoryBuffer memory;
    Aggregator aggregator;

    nlohmann::json to_json() const;
    static ProtocolState from_json(const nlohmann::json& j);
};

struct Session {
    CompletionEngine& engine;
    EmbeddingEngine& embedder;
    const CapabilityRegistry& capabilities;
    vertex::VertexConfig vertex;
    std::vector<std::string> randoms;  // baseline texts for similarity steps
};

/// Checks the registry and plan and returns a state with an empty memory
/// buffer and aggregator. ConfigError when either is empty.
ProtocolState init_protocol(const CapabilityRegistry& capabilities, const Plan& expected);

/// Asks the engine for a numbered plan ("N. instruction" per line).
Plan generate_plan(const std::string& goal, CompletionEngine& engine);
/// Parser used by generate_plan; PlanFormatError on anything else.
Plan parse_plan(const std::string& goal, const std::string& text);

/// Scores `generated` against the references and appends the result.
vertex::NodeScore evaluate_step(const std::string& generated, const std::vector<std::string>& references,
                                const std::vector<std::string>& randoms, EmbeddingEngine& embedder,
                                const vertex::VertexConfig& cfg, Aggregator& aggregator, Stage stage);

/// Enqueues every task of `expected` not already known, depth first.
void unfold_plan(const Plan& expected, MemoryBuffer& buffer);

struct Selection {
    Task task;
    bool fallback = false;
    std::string answer;
};

/// The engine names the next task id. Anything but the head of the queue
/// (including engine errors) counts as a selection failure and the
/// expected-plan head is used instead.
Selection select_next_task(MemoryBuffer& buffer, CompletionEngine& engine);

struct Identification {
    const Capability* capability = nullptr;
    std::string proposal;
    bool exact = false;
};

/// Exact name match first, then the highest cosine between the proposal
/// and capability descriptions; ties go to the earlier registry entry.
Identification identify_capability(const Task& task, const CapabilityRegistry& registry, CompletionEngine& engine,
                                   EmbeddingEngine& embedder);

struct Execution {
    bool ok = false;
    std::string output;
    std::string error;
};

/// Never throws for executor failures; they are reported in the result.
Execution execute_task(const Task& task, const Capability& capability);

/// Moves a pending task to completed. StateError when it is not pending.
void update_progress(const std::string& task_id, const std::string& result, MemoryBuffer& buffer);

/// Mean of all recorded scores.
double finalize(const Aggregator& aggregator);

struct RunOptions {
    std::uint64_t seed = 0;
    std::string run_id;
    std::string engine_label = "scripted";
    std::string category = "protocol";
    std::string test;
};

struct RunResult {
    ProtocolState state;
    std::vector<std::string> execution_order;
    harness::TrajectoryRecord trajectory;
    double score = 0.0;
};

/// Full loop: plan generation and scoring, unfolding, then
/// select / identify / execute / evaluate / update until no task is left.
RunResult run_protocol(Session& session, const Plan& expected, const RunOptions& options);

}  // namespace nesy::protocol

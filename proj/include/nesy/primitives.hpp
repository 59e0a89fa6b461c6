#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nesy/constraints.hpp"
#include "nesy/engine.hpp"
#include "nesy/prompt.hpp"
#include "nesy/symbol.hpp"

namespace nesy {

enum class ReturnType { text, number, boolean, list };

struct OperatorSpec {
    std::string name;
    PromptSpec prompt;
    std::vector<Constraint> constraints;
    std::optional<Value> fallback;
    ReturnType return_type = ReturnType::text;
};

/// Data directory holding the few-shot tables (NESY_DATA_DIR overrides the
/// build-time default).
std::filesystem::path default_data_dir();

/// Reads one "input =>output" line per row. Blank lines and lines starting
/// with '#' are skipped; any other malformed row is a ConstraintViolation.
std::vector<std::string> read_fewshot_file(const std::filesystem::path& path);

/// Few-shot tables keyed by operator name.
class OperatorCatalog {
public:
    static OperatorCatalog load(const std::filesystem::path& fewshot_dir);
    static const OperatorCatalog& builtin();

    const std::vector<std::string>& examples(std::string_view op) const;
    void set_examples(const std::string& op, std::vector<std::string> lines);
    std::vector<std::string> names() const;

    static const std::vector<std::string>& operator_names();

private:
    std::map<std::string, std::vector<std::string>, std::less<>> tables_;
};

using Solver = std::function<std::string(const std::string&)>;

/// Everything an operator needs: the graph it writes to and its engines.
struct Runtime {
    Graph& graph;
    CompletionEngine& engine;
    EmbeddingEngine* embedder = nullptr;
    const OperatorCatalog* catalog = nullptr;
    Solver solver;
    DecodeParams decode;

    const OperatorCatalog& ops() const { return catalog ? *catalog : OperatorCatalog::builtin(); }
};

struct OpResult {
    NodeId node;
    Value value;
};

/// Compose, invoke, post-process and constrain one engine call whose
/// result becomes a new child of `left`. Engine failures and constraint
/// violations resolve to `spec.fallback` when one is declared.
OpResult run_operator(Runtime& rt, const OperatorSpec& spec, NodeId left, std::string user_input,
                      const std::optional<std::string>& payload = std::nullopt);

struct BoolResult {
    bool value;
    NodeId node;
};

enum class Relation { less, less_equal, greater, greater_equal };
enum class Order { ascending, descending };

std::string_view relation_symbol(Relation r);

namespace ops {

using Operand = std::variant<NodeId, Payload>;

NodeId combine(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback = std::nullopt);
NodeId replace(Runtime& rt, NodeId a, const std::string& remove, const std::optional<std::string>& insert = std::nullopt,
               std::optional<Value> fallback = std::nullopt);
BoolResult equals(Runtime& rt, NodeId a, const Operand& b, std::optional<bool> fallback = std::nullopt);
BoolResult compare(Runtime& rt, NodeId a, const Operand& b, Relation rel, std::optional<bool> fallback = std::nullopt);
NodeId logic_and(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback = std::nullopt);
NodeId logic_or(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback = std::nullopt);
NodeId logic_xor(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback = std::nullopt);
NodeId rank(Runtime& rt, NodeId a, const std::string& measure, Order order,
            std::optional<Value> fallback = std::nullopt);
NodeId extract(Runtime& rt, NodeId a, const std::string& pattern, std::optional<Value> fallback = std::nullopt);
NodeId translate(Runtime& rt, NodeId a, const std::string& language, std::optional<Value> fallback = std::nullopt);
NodeId query(Runtime& rt, NodeId a, const std::string& question, const std::optional<std::string>& payload = std::nullopt,
             std::optional<Value> fallback = std::nullopt);
BoolResult isinstanceof(Runtime& rt, NodeId a, const std::string& category, std::optional<bool> fallback = std::nullopt);
/// Sends the rendered symbol to the runtime's solver capability.
NodeId evaluate_expression(Runtime& rt, NodeId a);

}  // namespace ops

}  // namespace nesy

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nesy/errors.hpp"
#include "nesy/primitives.hpp"

namespace nesy {

/// A deferred evaluation: applied to an input node, it derives a new node
/// somewhere below that input. The behavior is fixed at construction.
class Expression {
public:
    using Body = std::function<NodeId(Runtime&, NodeId)>;

    Expression(std::string name, Body body, ReturnType return_type = ReturnType::text,
               std::size_t prompt_overhead = 0);

    /// Runs `spec` with the rendered input as user input.
    static Expression from_operator(OperatorSpec spec);

    NodeId operator()(Runtime& rt, NodeId input) const;

    const std::string& name() const { return name_; }
    ReturnType return_type() const { return return_type_; }
    /// Token estimate of the fixed prompt segments.
    std::size_t prompt_overhead() const { return prompt_overhead_; }

    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    Expression& annotate(const std::string& key, std::string value) {
        metadata_[key] = std::move(value);
        return *this;
    }

private:
    std::string name_;
    Body body_;
    ReturnType return_type_;
    std::size_t prompt_overhead_;
    std::map<std::string, std::string> metadata_;
};

namespace components {
Expression clean();
Expression translate_to(const std::string& language);
Expression outline();
Expression summarize();
}  // namespace components

struct SequencePlan {
    std::vector<Expression> steps;
};

/// A failing step inside sequence_eval.
class SequenceError : public Error {
public:
    SequenceError(std::size_t step, ErrorKind cause, const std::string& what)
        : Error(cause, "sequence step " + std::to_string(step) + " failed: " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

NodeId sequence_eval(Runtime& rt, const SequencePlan& plan, NodeId input);

/// Wraps a plan as a single expression, so sequences nest.
Expression sequence(SequencePlan plan, std::string name = "Sequence");

struct ChunkSpec {
    std::size_t chunk_budget = 1024;
    std::size_t overlap = 0;

    void validate() const;
};

struct Chunk {
    std::size_t index = 0;
    std::size_t first_word = 0;
    std::size_t word_count = 0;
    std::string text;
};

/// Splits on whitespace into chunks whose token estimate fits the budget.
/// Each word keeps its trailing whitespace, so with zero overlap the chunk
/// texts concatenate back to the input. Overlap is the largest whole-word
/// run whose estimate does not exceed `spec.overlap`.
std::vector<Chunk> chunk_text(std::string_view text, const ChunkSpec& spec);

/// Lazily yields one result node per chunk, in chunk order.
class Stream {
public:
    std::optional<NodeId> next();
    std::vector<NodeId> collect();
    std::size_t size() const { return chunks_.size(); }
    const std::vector<Chunk>& chunks() const { return chunks_; }

private:
    friend Stream stream_eval(Runtime&, SequencePlan, NodeId, const ChunkSpec&);
    Stream(Runtime& rt, SequencePlan plan, NodeId input, std::vector<Chunk> chunks)
        : rt_(&rt), plan_(std::move(plan)), input_(input), chunks_(std::move(chunks)) {}

    Runtime* rt_;
    SequencePlan plan_;
    NodeId input_;
    std::vector<Chunk> chunks_;
    std::size_t cursor_ = 0;
};

/// Throws ConfigError before any engine call when the chunk budget plus the
/// plan's prompt overhead exceeds the engine's context budget.
Stream stream_eval(Runtime& rt, SequencePlan inner, NodeId input, const ChunkSpec& spec);

struct Cluster {
    std::vector<std::size_t> members;  // indices into the input list
    std::string merged_text;
    std::string label;
    NodeId node;  // merged node
};

struct ClusterResult {
    std::vector<Cluster> clusters;
};

inline constexpr double kDefaultClusterThreshold = 0.75;

/// Greedy in-order clustering: each chunk joins the first cluster whose
/// centroid cosine reaches `threshold`, otherwise it opens a new one.
ClusterResult cluster_merge(Runtime& rt, const std::vector<NodeId>& chunks,
                            double threshold = kDefaultClusterThreshold);

struct Attempt {
    std::string input;
    std::string output;
    std::string error;
};

class RetryExhaustedError : public Error {
public:
    RetryExhaustedError(ErrorKind kind, const std::string& what, std::vector<Attempt> history)
        : Error(kind, what), history_(std::move(history)) {}
    const std::vector<Attempt>& history() const noexcept { return history_; }

private:
    std::vector<Attempt> history_;
};

/// Evaluates `behavior`; on failure asks the engine to correct the input
/// (showing the input, failing output and error of the last attempt) and
/// retries. At most retries+1 attempts.
NodeId try_eval(Runtime& rt, const Expression& behavior, NodeId input, std::size_t retries);

/// Parses "OPERATION: ..." / "EXAMPLE: in =>out" lines into an operator spec.
OperatorSpec parse_operator_spec(std::string_view generated, std::string name);

/// Asks the engine for an operator spec that achieves `goal` and returns it
/// as an executable expression. The generated spec is recorded in the
/// expression's metadata and on `context`.
Expression derive_subprocess(Runtime& rt, const std::string& goal, NodeId context);

}  // namespace nesy

#include "nesy/composition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "nesy/text.hpp"

namespace nesy {

namespace {

bool is_descendant(const Graph& g, NodeId node, NodeId ancestor) {
    const SymbolNode* n = &g.node(node);
    while (n->parent) {
        if (*n->parent == ancestor) return true;
        n = &g.node(*n->parent);
    }
    return false;
}

std::size_t fixed_prompt_estimate(const PromptSpec& spec) {
    SymbolNode empty;
    return estimate_context(compose_request(empty, spec, std::nullopt, ""));
}

ErrorKind kind_of(const std::exception& e) {
    if (const auto* ne = dynamic_cast<const Error*>(&e)) return ne->kind();
    return ErrorKind::execution;
}

}  // namespace

Expression::Expression(std::string name, Body body, ReturnType return_type, std::size_t prompt_overhead)
    : name_(std::move(name)), body_(std::move(body)), return_type_(return_type), prompt_overhead_(prompt_overhead) {}

Expression Expression::from_operator(OperatorSpec spec) {
    spec.prompt.validate();
    auto overhead = fixed_prompt_estimate(spec.prompt);
    auto ret = spec.return_type;
    auto name = spec.name;
    Expression e(
        name,
        [spec = std::move(spec)](Runtime& rt, NodeId input) {
            return run_operator(rt, spec, input, render(rt.graph.node(input).payload)).node;
        },
        ret, overhead);
    return e;
}

NodeId Expression::operator()(Runtime& rt, NodeId input) const {
    auto out = body_(rt, input);
    if (!is_descendant(rt.graph, out, input)) {
        throw StateError("expression '" + name_ + "' returned " + out.str() + ", which is not derived from " +
                         input.str());
    }
    if (!rt.graph.node(out).metadata.count("expression")) rt.graph.set_metadata(out, "expression", name_);
    return out;
}

namespace components {

namespace {
Expression component(std::string name, std::string operation) {
    OperatorSpec s;
    s.name = std::move(name);
    s.prompt.operation = std::move(operation);
    return Expression::from_operator(std::move(s));
}
}  // namespace

Expression clean() { return component("Clean", "Clean the text: remove markup and noise, normalize spacing."); }

Expression translate_to(const std::string& language) {
    return component("Translate", "Translate the text into " + language + ".");
}

Expression outline() { return component("Outline", "Write a short bullet-point outline of the text."); }

Expression summarize() { return component("Summarize", "Summarize the text in one sentence."); }

}  // namespace components

NodeId sequence_eval(Runtime& rt, const SequencePlan& plan, NodeId input) {
    if (plan.steps.empty()) throw ArgumentError("sequence plan has no steps");
    NodeId current = input;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        try {
            current = plan.steps[i](rt, current);
        } catch (const SequenceError&) {
            throw;
        } catch (const std::exception& e) {
            throw SequenceError(i, kind_of(e), e.what());
        }
    }
    return current;
}

Expression sequence(SequencePlan plan, std::string name) {
    if (plan.steps.empty()) throw ArgumentError("sequence plan has no steps");
    std::size_t overhead = 0;
    for (const auto& s : plan.steps) overhead = std::max(overhead, s.prompt_overhead());
    auto ret = plan.steps.back().return_type();
    return Expression(
        std::move(name), [plan = std::move(plan)](Runtime& rt, NodeId input) { return sequence_eval(rt, plan, input); },
        ret, overhead);
}

void ChunkSpec::validate() const {
    if (chunk_budget == 0) throw ConfigError("chunk budget must be positive");
    if (overlap >= chunk_budget) throw ConfigError("chunk overlap must be smaller than the chunk budget");
}

namespace {

// Largest word count whose estimate fits within `tokens`.
std::size_t words_within(std::size_t tokens) {
    std::size_t k = tokens * 100 / 133 + 2;
    while (k > 0 && k * 133 / 100 > tokens) --k;
    return k;
}

}  // namespace

std::vector<Chunk> chunk_text(std::string_view s, const ChunkSpec& spec) {
    spec.validate();
    // word tokens with trailing whitespace; leading whitespace goes with the first
    std::vector<std::string_view> words;
    std::size_t i = 0;
    auto is_ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    std::size_t lead = 0;
    while (lead < s.size() && is_ws(s[lead])) ++lead;
    i = lead;
    std::size_t token_start = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_ws(s[i])) ++i;
        while (i < s.size() && is_ws(s[i])) ++i;
        words.push_back(s.substr(token_start, i - token_start));
        token_start = i;
    }
    if (words.empty()) return {Chunk{0, 0, 0, std::string(s)}};

    auto per_chunk = words_within(spec.chunk_budget);
    auto overlap = words_within(spec.overlap);
    if (per_chunk == 0) throw ConfigError("chunk budget is too small for a single word");
    if (overlap >= per_chunk) throw ConfigError("chunk overlap leaves no room for new words");

    std::vector<Chunk> out;
    std::size_t start = 0;
    while (true) {
        auto end = std::min(start + per_chunk, words.size());
        Chunk c;
        c.index = out.size();
        c.first_word = start;
        c.word_count = end - start;
        for (std::size_t w = start; w < end; ++w) c.text += words[w];
        out.push_back(std::move(c));
        if (end == words.size()) break;
        start = end - overlap;
    }
    return out;
}

std::optional<NodeId> Stream::next() {
    if (cursor_ >= chunks_.size()) return std::nullopt;
    const auto& c = chunks_[cursor_++];
    auto chunk_node = rt_->graph.derive(input_, c.text);
    rt_->graph.set_metadata(chunk_node, "chunk", std::to_string(c.index));
    return sequence_eval(*rt_, plan_, chunk_node);
}

std::vector<NodeId> Stream::collect() {
    std::vector<NodeId> out;
    while (auto n = next()) out.push_back(*n);
    return out;
}

Stream stream_eval(Runtime& rt, SequencePlan inner, NodeId input, const ChunkSpec& spec) {
    spec.validate();
    if (inner.steps.empty()) throw ArgumentError("stream needs a non-empty inner plan");
    std::size_t overhead = 0;
    for (const auto& s : inner.steps) overhead = std::max(overhead, s.prompt_overhead());
    auto budget = rt.engine.context_budget();
    if (spec.chunk_budget + overhead > budget) {
        throw ConfigError("chunk budget " + std::to_string(spec.chunk_budget) + " plus prompt overhead " +
                          std::to_string(overhead) + " exceeds the engine context budget " + std::to_string(budget));
    }
    auto chunks = chunk_text(render(rt.graph.node(input).payload), spec);
    return Stream(rt, std::move(inner), input, std::move(chunks));
}

namespace {

double cosine(const Embedding& a, const Embedding& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ClusterResult cluster_merge(Runtime& rt, const std::vector<NodeId>& chunks, double threshold) {
    if (!rt.embedder) throw ConfigError("clustering needs an embedding engine");
    if (chunks.empty()) return {};
    std::vector<std::string> texts;
    for (auto id : chunks) texts.push_back(render(rt.graph.node(id).payload));
    auto vectors = rt.embedder->embed(texts);
    if (vectors.size() != chunks.size()) throw ProtocolError("embedding count does not match chunk count", "");
    for (std::size_t i = 0; i < chunks.size(); ++i) rt.graph.set_embedding(chunks[i], vectors[i]);

    std::vector<Embedding> centroids;
    ClusterResult result;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        std::size_t target = centroids.size();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (cosine(centroids[c], vectors[i]) >= threshold) {
                target = c;
                break;
            }
        }
        if (target == centroids.size()) {
            centroids.emplace_back(vectors[i].size(), 0.0);
            result.clusters.emplace_back();
        }
        for (std::size_t k = 0; k < vectors[i].size(); ++k) centroids[target][k] += vectors[i][k];
        result.clusters[target].members.push_back(i);
    }

    for (std::size_t c = 0; c < result.clusters.size(); ++c) {
        auto& cl = result.clusters[c];
        std::vector<std::string> parts;
        for (auto m : cl.members) parts.push_back(texts[m]);
        cl.merged_text = text::join(parts, "\n");
        cl.node = rt.graph.derive(chunks[cl.members.front()], cl.merged_text);
        rt.graph.set_metadata(cl.node, "cluster", std::to_string(c));

        OperatorSpec label;
        label.name = "label";
        label.prompt.operation = "Give a short label of a few words for the topic of the input.";
        label.prompt.examples = rt.ops().examples("label");
        label.constraints.push_back(Constraint::predicate(
            [](const Value& v) { return !text::trim(to_text(v)).empty(); }, "label is empty"));
        label.fallback = Value{"cluster " + std::to_string(c)};
        cl.label = to_text(run_operator(rt, label, cl.node, cl.merged_text).value);
    }
    return result;
}

NodeId try_eval(Runtime& rt, const Expression& behavior, NodeId input, std::size_t retries) {
    std::vector<Attempt> history;
    NodeId current = input;
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return behavior(rt, current);
        } catch (const std::exception& e) {
            Attempt a;
            a.input = render(rt.graph.node(current).payload);
            if (const auto* ex = dynamic_cast<const ExecutionError*>(&e)) a.output = ex->output();
            a.error = e.what();
            history.push_back(a);
            if (attempt >= retries) throw RetryExhaustedError(kind_of(e), e.what(), std::move(history));

            OperatorSpec fix;
            fix.name = "correct";
            fix.prompt.operation =
                "The input failed with the error below. Return only a corrected version of the input.";
            auto analysis = "Input:\n" + a.input + "\nOutput:\n" + a.output + "\nError:\n" + a.error;
            current = run_operator(rt, fix, current, analysis).node;
        }
    }
}

OperatorSpec parse_operator_spec(std::string_view generated, std::string name) {
    OperatorSpec spec;
    spec.name = std::move(name);
    bool have_operation = false;
    for (const auto& raw : text::split_lines(generated)) {
        auto line = text::trim(raw);
        if (line.empty()) continue;
        auto upper_prefix = [&](std::string_view p) {
            return line.size() >= p.size() && text::to_lower(line.substr(0, p.size())) == text::to_lower(p);
        };
        if (upper_prefix("OPERATION:")) {
            if (have_operation) throw ConstraintViolation("generated spec has more than one OPERATION line");
            spec.prompt.operation = text::trim(line.substr(10));
            have_operation = !spec.prompt.operation.empty();
        } else if (upper_prefix("EXAMPLE:")) {
            auto ex = text::trim(line.substr(8));
            if (!is_dsl_line(ex)) throw ConstraintViolation("generated example is not an 'input =>output' line: " + ex);
            spec.prompt.examples.push_back(ex);
        } else {
            throw ConstraintViolation("unexpected line in generated spec: " + line);
        }
    }
    if (!have_operation) throw ConstraintViolation("generated spec has no OPERATION line");
    spec.prompt.validate();
    return spec;
}

Expression derive_subprocess(Runtime& rt, const std::string& goal, NodeId context) {
    PromptSpec meta;
    meta.operation =
        "Write an operator specification that achieves the goal. Reply with one line 'OPERATION: <instruction>' "
        "followed by zero or more lines 'EXAMPLE: <input> =><output>'.";
    auto req = compose_request(rt.graph.node(context), meta, std::nullopt, goal);
    req.decode = rt.decode;
    auto generated = strip_code_fence(rt.engine.complete(req).text);
    auto spec = parse_operator_spec(generated, "derived:" + goal);

    rt.graph.set_metadata(context, "subprocess:" + goal, generated);
    auto expr = Expression::from_operator(spec);
    expr.annotate("goal", goal);
    expr.annotate("operation", spec.prompt.operation);
    expr.annotate("examples", text::join(spec.prompt.examples, "\n"));
    return expr;
}

}  // namespace nesy

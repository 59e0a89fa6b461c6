#include "nesy/primitives.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "nesy/errors.hpp"
#include "nesy/text.hpp"

#ifndef NESY_DEFAULT_DATA_DIR
#define NESY_DEFAULT_DATA_DIR "data"
#endif

namespace nesy {

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("NESY_DATA_DIR"); env && *env) return env;
    return NESY_DEFAULT_DATA_DIR;
}

std::vector<std::string> read_fewshot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open few-shot table " + path.string());
    std::vector<std::string> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!is_dsl_line(line)) {
            throw ConstraintViolation(path.string() + ":" + std::to_string(lineno) + ": not an 'input =>output' line");
        }
        lines.push_back(line);
    }
    return lines;
}

const std::vector<std::string>& OperatorCatalog::operator_names() {
    static const std::vector<std::string> names = {
        "add", "replace", "equals", "compare", "and", "or", "xor",
        "rank", "extract", "translate", "query", "isinstanceof", "label",
    };
    return names;
}

OperatorCatalog OperatorCatalog::load(const std::filesystem::path& fewshot_dir) {
    OperatorCatalog c;
    for (const auto& name : operator_names()) {
        auto path = fewshot_dir / (name + ".txt");
        c.tables_[name] = std::filesystem::exists(path) ? read_fewshot_file(path) : std::vector<std::string>{};
    }
    return c;
}

const OperatorCatalog& OperatorCatalog::builtin() {
    static const OperatorCatalog c = load(default_data_dir() / "fewshot");
    return c;
}

const std::vector<std::string>& OperatorCatalog::examples(std::string_view op) const {
    static const std::vector<std::string> none;
    auto it = tables_.find(op);
    return it == tables_.end() ? none : it->second;
}

void OperatorCatalog::set_examples(const std::string& op, std::vector<std::string> lines) {
    for (const auto& l : lines) {
        if (!is_dsl_line(l)) throw ConstraintViolation("not an 'input =>output' line: " + l);
    }
    tables_[op] = std::move(lines);
}

std::vector<std::string> OperatorCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : tables_) out.push_back(k);
    return out;
}

std::string_view relation_symbol(Relation r) {
    switch (r) {
        case Relation::less: return "<";
        case Relation::less_equal: return "<=";
        case Relation::greater: return ">";
        case Relation::greater_equal: return ">=";
    }
    return "?";
}

namespace {

Payload to_payload(const Value& v, ReturnType rt) {
    switch (rt) {
        case ReturnType::number:
            if (const auto* d = std::get_if<double>(&v)) return *d;
            if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
            if (auto d = text::parse_number(to_text(v)); d && std::isfinite(*d)) return *d;
            return to_text(v);
        case ReturnType::list:
            if (auto l = text::parse_list(to_text(v))) return *l;
            return std::vector<std::string>{to_text(v)};
        case ReturnType::boolean:
        case ReturnType::text:
            break;
    }
    return to_text(v);
}

std::string post_process(std::string_view raw) { return strip_code_fence(strip_whitespace(raw)); }

}  // namespace

OpResult run_operator(Runtime& rt, const OperatorSpec& spec, NodeId left, std::string user_input,
                      const std::optional<std::string>& payload) {
    auto req = compose_request(rt.graph.node(left), spec.prompt, payload, std::move(user_input));
    req.decode = rt.decode;

    Value value;
    std::string engine_note = rt.engine.id();
    try {
        auto resp = rt.engine.complete(req);
        value = apply_constraints(post_process(resp.text), spec.constraints, spec.fallback);
    } catch (const ConstraintViolation&) {
        throw;
    } catch (const std::exception& e) {
        if (!spec.fallback) throw;
        value = *spec.fallback;
        engine_note += " (fallback: " + std::string(e.what()) + ")";
    }

    auto node = rt.graph.derive(left, to_payload(value, spec.return_type));
    rt.graph.set_metadata(node, "operation", spec.name);
    rt.graph.set_metadata(node, "engine", engine_note);
    return {node, value};
}

namespace ops {

namespace {

Payload operand_payload(const Runtime& rt, const Operand& b) {
    if (const auto* id = std::get_if<NodeId>(&b)) return rt.graph.node(*id).payload;
    return std::get<Payload>(b);
}

OperatorSpec make_spec(const Runtime& rt, std::string name, std::string operation, ReturnType ret,
                       std::optional<Value> fallback) {
    OperatorSpec s;
    s.prompt.operation = std::move(operation);
    s.prompt.examples = rt.ops().examples(name);
    s.name = std::move(name);
    s.return_type = ret;
    s.fallback = std::move(fallback);
    switch (ret) {
        case ReturnType::boolean:
            s.constraints.push_back(Constraint::cast_to(CastTarget::boolean));
            break;
        case ReturnType::list:
            s.constraints.push_back(Constraint::predicate(
                [](const Value& v) { return text::parse_list(to_text(v)).has_value(); }, "result is not a list"));
            break;
        default:
            break;
    }
    return s;
}

std::optional<Value> bool_fallback(std::optional<bool> f) {
    if (!f) return std::nullopt;
    return Value{*f};
}

BoolResult as_bool(const OpResult& r) {
    if (const auto* b = std::get_if<bool>(&r.value)) return {*b, r.node};
    return {text::to_lower(to_text(r.value)) == "true", r.node};
}

BoolResult decided(Runtime& rt, NodeId a, bool value, const char* op) {
    auto node = rt.graph.derive(a, std::string(value ? "True" : "False"));
    rt.graph.set_metadata(node, "operation", op);
    rt.graph.set_metadata(node, "engine", "strict");
    return {value, node};
}

void reject_blobs(const Payload& a, const Payload& b, std::string_view op) {
    if (std::holds_alternative<Blob>(a) || std::holds_alternative<Blob>(b)) {
        throw UnsupportedCombination(std::string(op) + " of " + std::string(payload_kind(a)) + " and " +
                                     std::string(payload_kind(b)) + " payloads is not supported");
    }
}

NodeId binary_text_op(Runtime& rt, NodeId a, const Operand& b, const char* name, const char* symbol,
                      std::string operation, std::optional<Value> fallback) {
    const auto& pa = rt.graph.node(a).payload;
    auto pb = operand_payload(rt, b);
    reject_blobs(pa, pb, name);
    auto spec = make_spec(rt, name, std::move(operation), ReturnType::text, std::move(fallback));
    return run_operator(rt, spec, a, literal(pa) + " " + symbol + " " + literal(pb)).node;
}

std::optional<std::vector<std::string>> as_sequence(const Payload& p) {
    if (const auto* l = std::get_if<std::vector<std::string>>(&p)) return *l;
    if (const auto* s = std::get_if<std::string>(&p)) return text::parse_list(*s);
    return std::nullopt;
}

std::optional<double> as_number(const Payload& p) {
    if (const auto* d = std::get_if<double>(&p)) return *d;
    if (const auto* s = std::get_if<std::string>(&p)) return text::parse_number(*s);
    return std::nullopt;
}

}  // namespace

NodeId combine(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback) {
    return binary_text_op(rt, a, b, "add", "+",
                          "Resolve the '+' statement between the two operands and return only the result.",
                          std::move(fallback));
}

NodeId replace(Runtime& rt, NodeId a, const std::string& remove, const std::optional<std::string>& insert,
               std::optional<Value> fallback) {
    auto statement = literal(rt.graph.node(a).payload) + " - " + text::quote(remove);
    if (insert) statement += " + " + text::quote(*insert);
    auto spec = make_spec(rt, "replace",
                          "Remove the subtracted part from the text and, if given, insert the added part in its "
                          "place. Return only the edited text.",
                          ReturnType::text, std::move(fallback));
    return run_operator(rt, spec, a, statement).node;
}

BoolResult equals(Runtime& rt, NodeId a, const Operand& b, std::optional<bool> fallback) {
    const auto& pa = rt.graph.node(a).payload;
    auto pb = operand_payload(rt, b);
    if (pa == pb) return decided(rt, a, true, "equals");
    if (auto x = as_number(pa), y = as_number(pb); x && y) return decided(rt, a, *x == *y, "equals");
    auto spec = make_spec(rt, "equals", "Decide whether both operands are semantically equal. Answer True or False.",
                          ReturnType::boolean, bool_fallback(fallback));
    return as_bool(run_operator(rt, spec, a, literal(pa) + " == " + literal(pb)));
}

BoolResult compare(Runtime& rt, NodeId a, const Operand& b, Relation rel, std::optional<bool> fallback) {
    const auto& pa = rt.graph.node(a).payload;
    auto pb = operand_payload(rt, b);
    if (auto x = as_number(pa), y = as_number(pb); x && y) {
        bool r = false;
        switch (rel) {
            case Relation::less: r = *x < *y; break;
            case Relation::less_equal: r = *x <= *y; break;
            case Relation::greater: r = *x > *y; break;
            case Relation::greater_equal: r = *x >= *y; break;
        }
        return decided(rt, a, r, "compare");
    }
    auto spec = make_spec(rt, "compare", "Evaluate the comparison by the meaning of its operands. Answer True or False.",
                          ReturnType::boolean, bool_fallback(fallback));
    return as_bool(
        run_operator(rt, spec, a, literal(pa) + " " + std::string(relation_symbol(rel)) + " " + literal(pb)));
}

NodeId logic_and(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback) {
    return binary_text_op(rt, a, b, "and", "&",
                          "Combine both statements with logical AND and state the conclusion in one sentence.",
                          std::move(fallback));
}

NodeId logic_or(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback) {
    return binary_text_op(rt, a, b, "or", "|",
                          "Combine both statements with logical OR and state the conclusion in one sentence.",
                          std::move(fallback));
}

NodeId logic_xor(Runtime& rt, NodeId a, const Operand& b, std::optional<Value> fallback) {
    return binary_text_op(rt, a, b, "xor", "^",
                          "Combine both statements with logical XOR (exactly one holds) and state the conclusion in "
                          "one sentence.",
                          std::move(fallback));
}

NodeId rank(Runtime& rt, NodeId a, const std::string& measure, Order order, std::optional<Value> fallback) {
    const auto& pa = rt.graph.node(a).payload;
    auto items = as_sequence(pa);
    if (!items) throw ArgumentError("rank needs a list payload, got " + std::string(payload_kind(pa)));

    std::vector<double> keys;
    for (const auto& it : *items) {
        auto k = text::parse_number(it);
        if (!k) break;
        keys.push_back(*k);
    }
    if (items->size() <= 1 || keys.size() == items->size()) {
        std::vector<std::size_t> idx(items->size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
            return order == Order::ascending ? keys[l] < keys[r] : keys[l] > keys[r];
        });
        std::vector<std::string> sorted;
        for (auto i : idx) sorted.push_back((*items)[i]);
        auto node = rt.graph.derive(a, sorted);
        rt.graph.set_metadata(node, "operation", "rank");
        rt.graph.set_metadata(node, "engine", "strict");
        return node;
    }
    auto spec = make_spec(rt, "rank",
                          "Rank the list items by their " + measure + " measure in " +
                              (order == Order::ascending ? "ascending" : "descending") +
                              " order. Return a Python list.",
                          ReturnType::list, std::move(fallback));
    return run_operator(rt, spec, a, text::render_list(*items)).node;
}

NodeId extract(Runtime& rt, NodeId a, const std::string& pattern, std::optional<Value> fallback) {
    auto spec = make_spec(rt, "extract", "Extract the " + pattern + " from the input. Return only the extracted part.",
                          ReturnType::text, std::move(fallback));
    return run_operator(rt, spec, a, render(rt.graph.node(a).payload)).node;
}

NodeId translate(Runtime& rt, NodeId a, const std::string& language, std::optional<Value> fallback) {
    auto spec = make_spec(rt, "translate", "Translate the input into " + language + ". Return only the translation.",
                          ReturnType::text, std::move(fallback));
    return run_operator(rt, spec, a, render(rt.graph.node(a).payload)).node;
}

NodeId query(Runtime& rt, NodeId a, const std::string& question, const std::optional<std::string>& payload,
             std::optional<Value> fallback) {
    auto spec = make_spec(rt, "query", "Answer the question about the input: " + question, ReturnType::text,
                          std::move(fallback));
    return run_operator(rt, spec, a, render(rt.graph.node(a).payload), payload).node;
}

BoolResult isinstanceof(Runtime& rt, NodeId a, const std::string& category, std::optional<bool> fallback) {
    auto spec = make_spec(rt, "isinstanceof",
                          "Is the input an instance of the category '" + category + "'? Answer True or False.",
                          ReturnType::boolean, bool_fallback(fallback));
    return as_bool(run_operator(rt, spec, a, render(rt.graph.node(a).payload)));
}

NodeId evaluate_expression(Runtime& rt, NodeId a) {
    if (!rt.solver) throw CapabilityMissingError("no solver capability registered for expression evaluation");
    auto answer = rt.solver(render(rt.graph.node(a).payload));
    auto node = rt.graph.derive(a, answer);
    rt.graph.set_metadata(node, "operation", "expression");
    rt.graph.set_metadata(node, "engine", "solver");
    return node;
}

}  // namespace ops

}  // namespace nesy

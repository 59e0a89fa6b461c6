#include "nesy/protocol/protocol.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>

#include "nesy/text.hpp"

namespace nesy::protocol {

using nlohmann::json;

// ---- plan -----------------------------------------------------------------

json Task::to_json() const {
    json j{{"id", id}, {"instruction", instruction}, {"references", references}};
    j["capability"] = capability ? json(*capability) : json(nullptr);
    if (!subtasks.empty()) {
        j["subtasks"] = json::array();
        for (const auto& s : subtasks) j["subtasks"].push_back(s.to_json());
    }
    return j;
}

Task Task::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("task must be an object");
    Task t;
    try {
        t.id = j.at("id").get<std::string>();
        t.instruction = j.at("instruction").get<std::string>();
        if (j.contains("capability") && !j.at("capability").is_null()) t.capability = j.at("capability").get<std::string>();
        if (j.contains("references")) t.references = j.at("references").get<std::vector<std::string>>();
        if (j.contains("subtasks")) {
            for (const auto& s : j.at("subtasks")) t.subtasks.push_back(Task::from_json(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed task: ") + e.what());
    }
    return t;
}

namespace {

void flatten_into(const std::vector<Task>& tasks, std::vector<Task>& out) {
    for (const auto& t : tasks) {
        Task copy = t;
        copy.subtasks.clear();
        out.push_back(std::move(copy));
        flatten_into(t.subtasks, out);
    }
}

}  // namespace

std::vector<Task> Plan::flatten() const {
    std::vector<Task> out;
    flatten_into(tasks, out);
    return out;
}

void Plan::validate() const {
    std::set<std::string> seen;
    for (const auto& t : flatten()) {
        if (t.id.empty()) throw ConfigError("task id is empty");
        if (text::trim(t.instruction).empty()) throw ConfigError("task '" + t.id + "' has an empty instruction");
        if (!seen.insert(t.id).second) throw ConfigError("duplicate task id '" + t.id + "'");
    }
}

std::string Plan::render() const {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < tasks.size(); ++i) lines.push_back(std::to_string(i + 1) + ". " + tasks[i].instruction);
    return text::join(lines, "\n");
}

json Plan::to_json() const {
    json j{{"goal", goal}, {"tasks", json::array()}};
    for (const auto& t : tasks) j["tasks"].push_back(t.to_json());
    return j;
}

Plan Plan::from_json(const json& j) {
    if (!j.is_object() || !j.contains("tasks") || !j.at("tasks").is_array()) {
        throw ConfigError("plan must be an object with a \"tasks\" array");
    }
    Plan p;
    p.goal = j.value("goal", std::string{});
    for (const auto& t : j.at("tasks")) p.tasks.push_back(Task::from_json(t));
    p.validate();
    return p;
}

Plan Plan::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open plan file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("plan file " + path.string() + " is not valid JSON");
    return from_json(j);
}

Plan parse_plan(const std::string& goal, const std::string& text) {
    static const std::regex line_re(R"(^\s*(\d+)\.\s+(\S.*?)\s*$)");
    Plan p;
    p.goal = goal;
    for (const auto& raw_line : text::split_lines(text)) {
        if (text::trim(raw_line).empty()) continue;
        std::smatch m;
        if (!std::regex_match(raw_line, m, line_re)) {
            throw PlanFormatError("plan line is not of the form 'N. instruction': " + raw_line, text);
        }
        auto expected = std::to_string(p.tasks.size() + 1);
        if (m[1].str() != expected) {
            throw PlanFormatError("plan numbering skips: expected " + expected + ", got " + m[1].str(), text);
        }
        Task t;
        t.id = "t" + expected;
        t.instruction = m[2].str();
        p.tasks.push_back(std::move(t));
    }
    if (p.tasks.empty()) throw PlanFormatError("engine returned no plan", text);
    return p;
}

Plan generate_plan(const std::string& goal, CompletionEngine& engine) {
    EngineRequest req;
    req[Segment::operation] =
        "Break the goal into a short ordered plan. Answer with one task per line, formatted as 'N. instruction'.";
    req[Segment::user_input] = goal;
    auto response = engine.complete(req);
    return parse_plan(goal, response.text);
}

// ---- registry, memory, stages ---------------------------------------------

void CapabilityRegistry::add(Capability c) {
    if (c.name.empty()) throw ConfigError("capability name is empty");
    if (find(c.name)) throw ConfigError("duplicate capability '" + c.name + "'");
    items_.push_back(std::move(c));
}

const Capability* CapabilityRegistry::find(std::string_view name) const {
    for (const auto& c : items_) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::vector<std::string> CapabilityRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& c : items_) out.push_back(c.name);
    return out;
}

bool MemoryBuffer::is_pending(std::string_view id) const {
    for (const auto& t : pending) {
        if (t.id == id) return true;
    }
    return false;
}

bool MemoryBuffer::is_completed(std::string_view id) const {
    for (const auto& c : completed) {
        if (c.task.id == id) return true;
    }
    return false;
}

std::string MemoryBuffer::describe() const {
    std::string out = "Goal: " + goal + "\nTasks:\n";
    for (const auto& t : tasks) {
        const char* mark = is_completed(t.id) ? "done" : "pending";
        out += "- [" + std::string(mark) + "] " + t.id + ": " + t.instruction + "\n";
    }
    out += "Completed " + std::to_string(completed.size()) + " of " + std::to_string(tasks.size()) + ".";
    if (last_failure) out += "\nLast failure: " + *last_failure;
    return out;
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::plan: return "plan";
        case Stage::capability: return "capability";
        case Stage::task: return "task";
    }
    return "task";
}

Stage parse_stage(std::string_view name) {
    if (name == "plan") return Stage::plan;
    if (name == "capability") return Stage::capability;
    if (name == "task") return Stage::task;
    throw ArgumentError("unknown stage '" + std::string(name) + "'");
}

// ---- state serialization --------------------------------------------------

namespace {

json score_json(const vertex::NodeScore& s) {
    return json{{"raw", s.raw}, {"score", s.score}, {"bernoulli", s.bernoulli},
                {"sigma", s.sigma}, {"z", s.z}, {"z_rand", s.z_rand}};
}

vertex::NodeScore score_from_json(const json& j) {
    return {j.at("raw").get<double>(), j.at("score").get<double>(), j.at("bernoulli").get<bool>(),
            j.at("sigma").get<double>(), j.at("z").get<double>(), j.at("z_rand").get<double>()};
}

}  // namespace

json ProtocolState::to_json() const {
    json mem{{"goal", memory.goal}, {"tasks", json::array()}, {"completed", json::array()},
             {"pending", json::array()}, {"selection_failures", memory.selection_failures}};
    mem["last_failure"] = memory.last_failure ? json(*memory.last_failure) : json(nullptr);
    for (const auto& t : memory.tasks) mem["tasks"].push_back(t.to_json());
    for (const auto& c : memory.completed) mem["completed"].push_back({{"task", c.task.id}, {"result", c.result}});
    for (const auto& t : memory.pending) mem["pending"].push_back(t.id);

    json agg = json::array();
    for (const auto& e : aggregator.entries()) {
        json s = score_json(e.score);
        s["stage"] = stage_name(e.stage);
        agg.push_back(std::move(s));
    }
    return json{{"expected", expected.to_json()}, {"capabilities", capability_names}, {"memory", mem},
                {"aggregator", agg}};
}

ProtocolState ProtocolState::from_json(const json& j) {
    try {
        ProtocolState st;
        st.expected = Plan::from_json(j.at("expected"));
        st.capability_names = j.at("capabilities").get<std::vector<std::string>>();
        const auto& mem = j.at("memory");
        st.memory.goal = mem.at("goal").get<std::string>();
        for (const auto& t : mem.at("tasks")) st.memory.tasks.push_back(Task::from_json(t));
        auto lookup = [&](const std::string& id) -> const Task& {
            for (const auto& t : st.memory.tasks) {
                if (t.id == id) return t;
            }
            throw ConfigError("state references unknown task '" + id + "'");
        };
        for (const auto& c : mem.at("completed")) {
            st.memory.completed.push_back({lookup(c.at("task").get<std::string>()), c.at("result").get<std::string>()});
        }
        for (const auto& id : mem.at("pending")) st.memory.pending.push_back(lookup(id.get<std::string>()));
        if (!mem.at("last_failure").is_null()) st.memory.last_failure = mem.at("last_failure").get<std::string>();
        st.memory.selection_failures = mem.at("selection_failures").get<std::size_t>();
        for (const auto& e : j.at("aggregator")) {
            st.aggregator.append(parse_stage(e.at("stage").get<std::string>()), score_from_json(e));
        }
        return st;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed protocol state: ") + e.what());
    }
}

// ---- algorithm steps ------------------------------------------------------

ProtocolState init_protocol(const CapabilityRegistry& capabilities, const Plan& expected) {
    if (capabilities.empty()) throw ConfigError("capability registry is empty");
    if (expected.tasks.empty()) throw ConfigError("expected plan has no tasks");
    expected.validate();
    ProtocolState st;
    st.expected = expected;
    st.capability_names = capabilities.names();
    st.memory.goal = expected.goal;
    return st;
}

vertex::NodeScore evaluate_step(const std::string& generated, const std::vector<std::string>& references,
                                const std::vector<std::string>& randoms, EmbeddingEngine& embedder,
                                const vertex::VertexConfig& cfg, Aggregator& aggregator, Stage stage) {
    auto s = harness::score_texts(embedder, generated, references, randoms, cfg);
    aggregator.append(stage, s);
    return s;
}

void unfold_plan(const Plan& expected, MemoryBuffer& buffer) {
    if (buffer.goal.empty()) buffer.goal = expected.goal;
    for (auto& t : expected.flatten()) {
        bool known = false;
        for (const auto& k : buffer.tasks) {
            if (k.id == t.id) {
                known = true;
                break;
            }
        }
        if (known) continue;
        buffer.tasks.push_back(t);
        buffer.pending.push_back(std::move(t));
    }
}

Selection select_next_task(MemoryBuffer& buffer, CompletionEngine& engine) {
    if (buffer.pending.empty()) throw StateError("no pending task to select");
    const Task& head = buffer.pending.front();
    Selection sel{head, false, {}};
    EngineRequest req;
    req[Segment::dynamic_context] = buffer.describe();
    req[Segment::operation] = "Which task should be executed next? Answer with the task id only.";
    req[Segment::user_input] = "Next task id:";
    try {
        sel.answer = text::trim(engine.complete(req).text);
    } catch (const std::exception& e) {
        sel.answer.clear();
        buffer.last_failure = std::string("selection engine error: ") + e.what();
        ++buffer.selection_failures;
        sel.fallback = true;
        return sel;
    }
    if (sel.answer != head.id) {
        buffer.last_failure = "selection '" + sel.answer + "' rejected; expected plan continues with " + head.id;
        ++buffer.selection_failures;
        sel.fallback = true;
    }
    return sel;
}

namespace {

double cosine(const Embedding& a, const Embedding& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace

Identification identify_capability(const Task& task, const CapabilityRegistry& registry, CompletionEngine& engine,
                                   EmbeddingEngine& embedder) {
    if (registry.empty()) throw ConfigError("capability registry is empty");
    Identification out;
    EngineRequest req;
    std::string listing;
    for (const auto& c : registry.all()) listing += "- " + c.name + ": " + c.description + "\n";
    req[Segment::dynamic_context] = "Available capabilities:\n" + listing;
    req[Segment::operation] = "Name the capability best suited to the task. Answer with the capability name only.";
    req[Segment::user_input] = task.instruction;
    try {
        out.proposal = text::trim(engine.complete(req).text);
    } catch (const std::exception&) {
        out.proposal.clear();
    }
    if (const auto* c = registry.find(out.proposal)) {
        out.capability = c;
        out.exact = true;
        return out;
    }
    if (registry.size() == 1) {
        out.capability = &registry.all().front();
        return out;
    }
    std::vector<std::string> texts{out.proposal};
    for (const auto& c : registry.all()) texts.push_back(c.description);
    auto vecs = embedder.embed(texts);
    double best = -2.0;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        double c = cosine(vecs[0], vecs[i + 1]);
        if (c > best) {
            best = c;
            out.capability = &registry.all()[i];
        }
    }
    return out;
}

Execution execute_task(const Task& task, const Capability& capability) {
    Execution out;
    if (!capability.executor) {
        out.error = "capability '" + capability.name + "' has no executor";
        return out;
    }
    try {
        out.output = capability.executor(task.instruction);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

void update_progress(const std::string& task_id, const std::string& result, MemoryBuffer& buffer) {
    for (auto it = buffer.pending.begin(); it != buffer.pending.end(); ++it) {
        if (it->id == task_id) {
            buffer.completed.push_back({*it, result});
            buffer.pending.erase(it);
            return;
        }
    }
    throw StateError("task '" + task_id + "' is not pending");
}

double finalize(const Aggregator& aggregator) {
    std::vector<vertex::NodeScore> scores;
    for (const auto& e : aggregator.entries()) scores.push_back(e.score);
    return vertex::aggregate(scores);
}

// ---- driver ---------------------------------------------------------------

RunResult run_protocol(Session& session, const Plan& expected, const RunOptions& options) {
    RunResult out;
    out.state = init_protocol(session.capabilities, expected);
    auto& st = out.state;
    auto& rec = out.trajectory;
    rec.run_id = options.run_id.empty() ? options.category + "-" + options.test + "-s" + std::to_string(options.seed)
                                        : options.run_id;
    rec.seed = options.seed;
    rec.engine = options.engine_label;
    rec.completion_engine = session.engine.id();
    rec.embedding_engine = session.embedder.id();
    rec.category = options.category;
    rec.test = options.test;

    auto record = [&](std::string node_id, Stage stage, std::string instruction, std::string generated,
                      std::vector<std::string> references, std::vector<std::string> randoms,
                      const vertex::NodeScore& s) {
        harness::StepRecord step;
        step.node_id = std::move(node_id);
        step.stage = std::string(stage_name(stage));
        step.instruction = std::move(instruction);
        step.generated = std::move(generated);
        step.references = std::move(references);
        step.randoms = std::move(randoms);
        step.set_score(s);
        rec.add_step(std::move(step));
    };

    // Plan generation is scored against the expected plan's text.
    const std::string expected_text = expected.render();
    try {
        Plan generated = generate_plan(expected.goal, session.engine);
        auto s = evaluate_step(generated.render(), {expected_text}, session.randoms, session.embedder,
                               session.vertex, st.aggregator, Stage::plan);
        record("plan", Stage::plan, expected.goal, generated.render(), {expected_text}, session.randoms, s);
    } catch (const PlanFormatError& e) {
        auto s = vertex::bernoulli_node_score(false);
        st.aggregator.append(Stage::plan, s);
        st.memory.last_failure = e.what();
        record("plan", Stage::plan, expected.goal, e.raw(), {expected_text}, {}, s);
    }

    unfold_plan(expected, st.memory);

    while (!st.memory.pending.empty()) {
        Selection sel = select_next_task(st.memory, session.engine);
        const Task& task = sel.task;
        out.execution_order.push_back(task.id);

        Identification ident = identify_capability(task, session.capabilities, session.engine, session.embedder);
        if (task.capability) {
            auto s = vertex::bernoulli_node_score(ident.capability->name == *task.capability);
            st.aggregator.append(Stage::capability, s);
            record(task.id + ":capability", Stage::capability, task.instruction, ident.capability->name,
                   {*task.capability}, {}, s);
        }

        Execution ex = execute_task(task, *ident.capability);
        if (!ex.ok) {
            auto s = vertex::bernoulli_node_score(false);
            st.aggregator.append(Stage::task, s);
            st.memory.last_failure = "task " + task.id + " failed: " + ex.error;
            record(task.id, Stage::task, task.instruction, "error: " + ex.error, task.references, {}, s);
        } else if (!task.references.empty()) {
            auto s = evaluate_step(ex.output, task.references, session.randoms, session.embedder, session.vertex,
                                   st.aggregator, Stage::task);
            record(task.id, Stage::task, task.instruction, ex.output, task.references, session.randoms, s);
        } else {
            auto s = vertex::bernoulli_node_score(true);
            st.aggregator.append(Stage::task, s);
            record(task.id, Stage::task, task.instruction, ex.output, {}, {}, s);
        }
        update_progress(task.id, ex.ok ? ex.output : std::string{}, st.memory);
    }

    out.score = finalize(st.aggregator);
    return out;
}

}  // namespace nesy::protocol

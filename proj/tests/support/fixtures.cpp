#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "nesy/errors.hpp"
#include "nesy/text.hpp"

using namespace nesy;

namespace fixtures {

vertex::SampleSet to_set(const oracle::Set& rows, vertex::Role role) {
    return vertex::SampleSet::from_rows(rows, role);
}

EngineRequest fig3_request() {
    Graph g;
    auto id = g.make_symbol(std::string("SELECT name FROM users"),
                            "You translate between natural language and SQL. Additions merge queries semantically.");
    g.set_dynamic_context(id, "Target dialect: PostgreSQL 15.");
    PromptSpec spec;
    spec.operation = "Combine both SQL queries into one query that returns the union of their conditions.";
    spec.examples = {"SELECT a FROM t WHERE x = 1 + SELECT a FROM t WHERE y = 2 =>SELECT a FROM t WHERE x = 1 OR y = 2",
                     "SELECT id FROM orders + SELECT id FROM refunds =>SELECT id FROM orders UNION SELECT id FROM refunds"};
    spec.output_template = "SELECT {{...}};";
    return compose_request(g.node(id), spec, std::string("previous result: 17 rows"),
                           "SELECT name FROM users + SELECT name FROM admins");
}

NodeId report_graph(Graph& g, std::map<std::string, NodeId>& names) {
    auto root = g.make_symbol(std::string("Report"));
    names["Report"] = root;
    names["Title"] = g.derive(root, std::string("Title"));
    names["Abstract"] = g.derive(root, std::string("Abstract"));
    names["Method"] = g.derive(root, std::string("Method"));
    names["Source"] = g.derive(names["Method"], std::string("Source"));
    names["RelatedWork"] = g.derive(root, std::string("RelatedWork"));
    for (const auto& [label, id] : names) g.link_result(label, id);
    return root;
}

Expression execute_behavior() {
    return Expression("Execute", [](Runtime& rt, NodeId input) {
        static const std::regex stmt(R"re(^\s*([A-Za-z_]\w*)\s*=\s*int\("([^"]*)"\)\s*$)re");
        const auto code = render(rt.graph.node(input).payload);
        std::smatch m;
        if (!std::regex_match(code, m, stmt)) {
            throw ExecutionError("SyntaxError: unsupported statement", code);
        }
        const auto literal = m[2].str();
        static const std::regex integer(R"(^[+-]?\d+$)");
        if (!std::regex_match(literal, integer)) {
            throw ExecutionError("ValueError: invalid literal for int() with base 10: '" + literal + "'",
                                 "Traceback (most recent call last): ValueError");
        }
        auto out = rt.graph.derive(input, m[1].str() + " = " + std::to_string(std::stoll(literal)));
        return out;
    });
}

std::map<std::string, std::string> try_script() {
    return {{"Input:\na = int(\"3,\")", "a = int(\"3\")"}};
}

std::map<std::string, std::string> chain_script() {
    return {{"Clean the text", "The tide rises twice a day."},
            {"into German", "Die Flut steigt zweimal am Tag."},
            {"outline", "- Flut\n- zweimal täglich"}};
}

std::vector<std::string> cluster_chunks() {
    return {"The harbor ferry leaves the north pier every hour.",
            "Fresh sourdough bread needs a long and slow rise.",
            "Solar panels convert sunlight into electric power.",
            "Every hour the harbor ferry leaves the north pier.",
            "Sourdough bread needs a slow and long fresh rise.",
            "Sunlight is converted into electric power by solar panels."};
}

std::map<std::string, std::string> cluster_label_script() {
    return {{"harbor ferry", "ferry schedule"}, {"sourdough", "bread baking"}, {"solar panels", "solar energy"}};
}

protocol::CapabilityRegistry scripted_capabilities() {
    protocol::CapabilityRegistry reg;
    reg.add({"WolframAlpha", "math solver for equations, integrals and numeric computation",
             [](const std::string& in) { return "solved: " + in; }});
    reg.add({"SerpApi", "web search engine for facts and current events",
             [](const std::string& in) { return "search results for: " + in; }});
    reg.add({"Selenium", "browser automation that opens and reads web pages",
             [](const std::string& in) { return "page text for: " + in; }});
    reg.add({"LLM", "language model for writing, summarizing and rewriting text",
             [](const std::string& in) { return "text for: " + in; }});
    return reg;
}

protocol::Plan five_task_plan() {
    auto refs = [](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
        return std::vector<std::string>{a, b, c, d};
    };
    protocol::Plan p;
    p.goal = "Write a short note on the tides at the harbor";
    p.tasks = {
        {"t1", "search tide times for the harbor", "SerpApi",
         refs("search results for: search tide times for the harbor", "search results for: tide times for the harbor",
              "search results for: search harbor tide times", "search results for: search tide times at the harbor"),
         {}},
        {"t2", "open the harbor authority page", "Selenium",
         refs("page text for: open the harbor authority page", "page text for: the harbor authority page",
              "page text for: open harbor authority page", "page text for: open the harbor authority web page"),
         {}},
        {"t3", "compute the interval between high tides", "WolframAlpha",
         refs("solved: compute the interval between high tides", "solved: compute interval between high tides",
              "solved: the interval between high tides", "solved: compute the interval between the high tides"),
         {}},
        {"t4", "draft the note", "LLM",
         refs("text for: draft the note", "text for: draft a note", "text for: draft the short note",
              "text for: drafting the note"),
         {}},
        {"t5", "proofread the note", "LLM",
         refs("text for: proofread the note", "text for: proofread a note", "text for: proofread the short note",
              "text for: proofreading the note"),
         {}},
    };
    return p;
}

FunctionCompletion::Fn protocol_engine(std::vector<std::string> bad_selections) {
    auto plan = five_task_plan();
    return [plan, bad = std::move(bad_selections)](const EngineRequest& req) -> std::string {
        const auto& op = req[Segment::operation];
        if (op.rfind("Break the goal", 0) == 0) return plan.render();
        if (op.rfind("Which task", 0) == 0) {
            // the head of the pending list is the first "[pending]" line
            const auto& ctx = req[Segment::dynamic_context];
            auto pos = ctx.find("[pending] ");
            if (pos == std::string::npos) return "none";
            auto id = ctx.substr(pos + 10, ctx.find(':', pos) - pos - 10);
            for (const auto& b : bad) {
                if (b == id) return "I would rather not say.";
            }
            return id;
        }
        if (op.rfind("Name the capability", 0) == 0) {
            for (const auto& t : plan.flatten()) {
                if (t.instruction == req[Segment::user_input]) return *t.capability;
            }
            return "LLM";
        }
        return "unexpected request";
    };
}

std::string fig3_transcript() { return render_request(fig3_request()); }

std::string try_transcript() {
    Graph g;
    MockCompletion inner(try_script(), 0);
    std::vector<std::string> analyses;
    FunctionCompletion engine([&](const EngineRequest& req) {
        analyses.push_back(req[Segment::user_input]);
        return inner.complete(req).text;
    });
    Runtime rt{g, engine, nullptr, nullptr, {}, {}};
    auto in = g.make_symbol(std::string("a = int(\"3,\")"));
    auto out = try_eval(rt, execute_behavior(), in, 2);
    nlohmann::json j{{"input", render(g.node(in).payload)},
                     {"output", render(g.node(out).payload)},
                     {"correction_calls", analyses.size()},
                     {"analyses", analyses}};
    return j.dump(2) + "\n";
}

std::string stream_transcript() {
    std::string text;
    for (int i = 0; i < 160; ++i) text += "word" + std::to_string(i) + (i % 12 == 11 ? ".\n" : " ");
    auto chunks = chunk_text(text, {40, 0});
    std::string joined;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : chunks) {
        joined += c.text;
        list.push_back({{"index", c.index}, {"first_word", c.first_word}, {"word_count", c.word_count},
                        {"tokens", estimate_tokens(c.text)}, {"text", c.text}});
    }
    nlohmann::json j{{"chunks", list}, {"concatenation_equals_input", joined == text}};
    return j.dump(2) + "\n";
}

std::string cluster_transcript() {
    Graph g;
    MockCompletion engine(cluster_label_script(), 0);
    MockEmbedding embedder(768, 0);
    Runtime rt{g, engine, &embedder, nullptr, {}, {}};
    std::vector<NodeId> ids;
    for (const auto& t : cluster_chunks()) ids.push_back(g.make_symbol(t));
    auto res = cluster_merge(rt, ids);
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& c : res.clusters) {
        summary.push_back({{"members", c.members}, {"label", c.label}, {"text", c.merged_text}});
    }
    return summary.dump(2) + "\n";
}

std::string golden(const std::string& name, const std::string& actual) {
    const std::string path = std::string(NESY_GOLDEN_DIR) + "/" + name;
    if (std::getenv("NESY_UPDATE_GOLDEN")) {
        std::ofstream out(path, std::ios::binary);
        out << actual;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing golden file " + path + ">";
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace fixtures

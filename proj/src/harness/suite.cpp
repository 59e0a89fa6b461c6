#include "nesy/harness/suite.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "nesy/baseline.hpp"
#include "nesy/errors.hpp"
#include "nesy/primitives.hpp"
#include "nesy/text.hpp"

namespace nesy::harness {

using nlohmann::json;

const std::vector<std::string>& categories() {
    static const std::vector<std::string> names{"associations", "modality", "code", "logic", "graphs"};
    return names;
}

namespace {

const std::set<std::string>& known_ops() {
    static const std::set<std::string> ops{"add",  "replace", "translate", "extract",      "query", "rank", "and",
                                           "or",   "xor",     "equals",    "isinstanceof", "fill"};
    return ops;
}

EngineKind parse_kind(const std::string& s) {
    if (s == "scripted") return EngineKind::scripted;
    if (s == "random") return EngineKind::random;
    if (s == "live") return EngineKind::live;
    throw ConfigError("unknown engine kind '" + s + "' (expected scripted, random or live)");
}

std::string list_categories() { return text::join(categories(), ", "); }

}  // namespace

std::unique_ptr<EmbeddingEngine> EmbeddingSpec::make() const {
    if (live) return std::make_unique<HttpEmbedding>(config);
    return std::make_unique<MockEmbedding>(dim, seed);
}

void SuiteConfig::validate() const {
    const auto& cats = categories();
    if (std::find(cats.begin(), cats.end(), category) == cats.end()) {
        throw ConfigError("unknown category '" + category + "'; valid categories: " + list_categories());
    }
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (engines.empty()) throw ConfigError("at least one engine is required");
    std::set<std::string> names;
    for (const auto& e : engines) {
        if (e.name.empty()) throw ConfigError("engine name is empty");
        if (!names.insert(e.name).second) throw ConfigError("duplicate engine name '" + e.name + "'");
        if (e.kind == EngineKind::live) e.completion.validate();
    }
    if (embedding.live) embedding.config.validate();
    if (random_samples == 0) throw ConfigError("random_samples must be positive");
    vertex.validate();
}

SuiteConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("suite config must be a JSON object");
    SuiteConfig cfg;
    try {
        cfg.category = j.value("category", std::string{});
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            if (s.is_number_integer()) {
                if (s.get<std::int64_t>() < 0) throw ConfigError("seeds must not be negative");
                for (std::uint64_t i = 0; i < s.get<std::uint64_t>(); ++i) cfg.seeds.push_back(i);
            } else {
                cfg.seeds = s.get<std::vector<std::uint64_t>>();
            }
        } else {
            for (std::uint64_t i = 0; i < 8; ++i) cfg.seeds.push_back(i);
        }
        if (j.contains("engines")) {
            for (const auto& e : j.at("engines")) {
                EngineSpec spec;
                spec.kind = parse_kind(e.at("kind").get<std::string>());
                spec.name = e.value("name", e.at("kind").get<std::string>());
                if (spec.kind == EngineKind::live) spec.completion = EngineConfig::from_json(e.at("completion"));
                cfg.engines.push_back(std::move(spec));
            }
        } else {
            cfg.engines = {{"scripted", EngineKind::scripted, {}}, {"random", EngineKind::random, {}}};
        }
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            auto kind = e.value("kind", std::string("mock"));
            if (kind == "live") {
                cfg.embedding.live = true;
                cfg.embedding.config = EngineConfig::from_json(e.at("config"));
            } else if (kind == "mock") {
                cfg.embedding.dim = e.value("dim", std::size_t{768});
                cfg.embedding.seed = e.value("seed", std::uint64_t{0});
            } else {
                throw ConfigError("unknown embedding kind '" + kind + "' (expected mock or live)");
            }
        }
        if (j.contains("vertex")) cfg.vertex = vertex::VertexConfig::from_json(j.at("vertex"));
        cfg.random_samples = j.value("random_samples", std::size_t{8});
        auto on_violation = j.value("on_violation", std::string("record"));
        if (on_violation != "record" && on_violation != "abort") {
            throw ConfigError("on_violation must be \"record\" or \"abort\", got '" + on_violation + "'");
        }
        cfg.abort_on_violation = on_violation == "abort";
        cfg.fixtures_dir = j.contains("fixtures_dir") ? std::filesystem::path(j.at("fixtures_dir").get<std::string>())
                                                      : default_data_dir() / "suites";
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed suite config: ") + e.what());
    }
    return cfg;
}

SuiteConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    auto cfg = parse_config(j);
    if (cfg.fixtures_dir.is_relative() && j.contains("fixtures_dir")) {
        cfg.fixtures_dir = path.parent_path() / cfg.fixtures_dir;
    }
    return cfg;
}

// ---- fixtures -------------------------------------------------------------

namespace {

Payload payload_from_json(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.get<double>();
    if (v.is_array()) return v.get<std::vector<std::string>>();
    throw ConfigError("step input must be text, a number or a list of text");
}

FixtureStep parse_step(const json& s, std::size_t index, const std::string& where) {
    FixtureStep step;
    step.op = s.at("op").get<std::string>();
    if (!known_ops().count(step.op)) throw ConfigError(where + ": unknown op '" + step.op + "'");
    step.instruction = s.value("instruction", step.op);
    if (s.contains("input")) {
        const auto& in = s.at("input");
        if (in.is_object()) {
            step.input_ref = in.at("ref").get<std::size_t>();
            if (*step.input_ref >= index) throw ConfigError(where + ": input ref must point to an earlier step");
        } else {
            step.input = payload_from_json(in);
        }
    } else if (index == 0) {
        throw ConfigError(where + ": the first step needs an input");
    }
    step.argument = s.value("argument", std::string{});
    if (s.contains("insert")) step.insert = s.at("insert").get<std::string>();
    if (s.contains("template")) step.output_template = s.at("template").get<std::string>();
    step.order = s.value("order", std::string("ascending"));
    step.answer = s.at("answer").get<std::string>();
    step.match = s.value("match", step.argument);
    step.references = s.at("references").get<std::vector<std::string>>();

    if (step.match.empty()) throw ConfigError(where + ": scripted match pattern is empty");
    if (step.references.empty()) throw ConfigError(where + ": at least one reference is required");
    if (step.order != "ascending" && step.order != "descending") throw ConfigError(where + ": bad order");
    if (step.op == "fill") {
        if (!step.output_template) throw ConfigError(where + ": fill needs a template");
        PromptSpec{step.argument, {}, step.output_template, {}}.validate();
    }
    return step;
}

}  // namespace

Fixture load_fixture(const std::filesystem::path& dir, const std::string& category) {
    auto path = dir / (category + ".json");
    std::ifstream in(path);
    if (!in) throw ConfigError("missing fixture " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("fixture " + path.string() + " is not valid JSON");
    Fixture f;
    try {
        f.category = j.at("category").get<std::string>();
        if (f.category != category) throw ConfigError("fixture " + path.string() + " declares category " + f.category);
        for (const auto& t : j.at("tests")) {
            FixtureTest test;
            test.name = t.at("name").get<std::string>();
            const auto& steps = t.at("steps");
            for (std::size_t i = 0; i < steps.size(); ++i) {
                test.steps.push_back(parse_step(steps[i], i, category + "/" + test.name + " step " + std::to_string(i)));
            }
            if (test.steps.empty()) throw ConfigError("fixture test " + test.name + " has no steps");
            f.tests.push_back(std::move(test));
        }
    } catch (const json::exception& e) {
        throw ConfigError("malformed fixture " + path.string() + ": " + e.what());
    }
    if (f.tests.empty()) throw ConfigError("fixture " + path.string() + " has no tests");
    return f;
}

std::unique_ptr<CompletionEngine> make_engine(const EngineSpec& spec, const FixtureTest& test, std::uint64_t seed) {
    switch (spec.kind) {
        case EngineKind::scripted: {
            std::map<std::string, std::string> script;
            for (const auto& s : test.steps) script[s.match] = s.answer;
            return std::make_unique<MockCompletion>(std::move(script), seed);
        }
        case EngineKind::random:
            return std::make_unique<RandomAsciiCompletion>(seed);
        case EngineKind::live: {
            EngineConfig c = spec.completion;
            c.seed = seed;
            return std::make_unique<HttpCompletion>(c);
        }
    }
    throw ConfigError("unknown engine kind");
}

// ---- running --------------------------------------------------------------

namespace {

NodeId run_step(Runtime& rt, const FixtureStep& step, NodeId input) {
    using namespace nesy::ops;
    const auto& op = step.op;
    if (op == "add") return combine(rt, input, Payload{step.argument});
    if (op == "replace") return replace(rt, input, step.argument, step.insert);
    if (op == "translate") return translate(rt, input, step.argument);
    if (op == "extract") return extract(rt, input, step.argument);
    if (op == "query") return query(rt, input, step.argument);
    if (op == "rank") {
        return rank(rt, input, step.argument, step.order == "ascending" ? Order::ascending : Order::descending);
    }
    if (op == "and") return logic_and(rt, input, Payload{step.argument});
    if (op == "or") return logic_or(rt, input, Payload{step.argument});
    if (op == "xor") return logic_xor(rt, input, Payload{step.argument});
    if (op == "equals") return equals(rt, input, Payload{step.argument}).node;
    if (op == "isinstanceof") return isinstanceof(rt, input, step.argument).node;
    if (op == "fill") {
        OperatorSpec spec;
        spec.name = "fill";
        spec.prompt.operation = step.argument;
        spec.prompt.output_template = step.output_template;
        return run_operator(rt, spec, input, render(rt.graph.node(input).payload)).node;
    }
    throw ConfigError("unknown op '" + op + "'");
}

}  // namespace

TrajectoryRecord run_test(const FixtureTest& test, const std::string& category, const EngineSpec& engine_spec,
                          EmbeddingEngine& embedder, std::uint64_t seed, const vertex::VertexConfig& cfg,
                          std::size_t random_samples, bool abort_on_violation) {
    auto engine = make_engine(engine_spec, test, seed);
    Graph graph;
    Runtime rt{graph, *engine, nullptr, nullptr, {}, {}};
    rt.decode.seed = seed;

    TrajectoryRecord rec;
    rec.run_id = category + "/" + test.name + "/" + engine_spec.name + "/s" + std::to_string(seed);
    rec.seed = seed;
    rec.engine = engine_spec.name;
    rec.completion_engine = engine->id();
    rec.embedding_engine = embedder.id();
    rec.category = category;
    rec.test = test.name;

    const auto randoms = random_baselines(seed, random_samples);
    std::vector<std::optional<NodeId>> outputs;
    for (std::size_t i = 0; i < test.steps.size(); ++i) {
        const auto& step = test.steps[i];
        StepRecord out;
        out.stage = "task";
        out.instruction = step.instruction;
        out.references = step.references;
        try {
            std::optional<NodeId> input;
            if (step.input) input = graph.make_symbol(*step.input);
            else if (step.input_ref) input = outputs[*step.input_ref];
            else input = outputs[i - 1];
            if (!input) throw StateError("input step failed");

            NodeId result = run_step(rt, step, *input);
            out.node_id = result.str();
            out.generated = render(graph.node(result).payload);
            out.randoms = randoms;
            out.set_score(score_texts(embedder, out.generated, step.references, randoms, cfg));
            outputs.push_back(result);
        } catch (const EngineUnavailableError&) {
            throw;
        } catch (const Error& e) {
            if (abort_on_violation && e.kind() == ErrorKind::constraint_violation) throw;
            out.generated = std::string("error: ") + e.what();
            out.randoms.clear();
            out.set_score(vertex::bernoulli_node_score(false));
            outputs.push_back(std::nullopt);
        }
        rec.add_step(std::move(out));
    }
    return rec;
}

SuiteResult run_suite(const SuiteConfig& config) {
    config.validate();
    const Fixture fixture = load_fixture(config.fixtures_dir, config.category);
    auto embedder = config.embedding.make();

    SuiteResult result;
    for (const auto& engine : config.engines) {
        for (auto seed : config.seeds) {
            for (const auto& test : fixture.tests) {
                result.trajectories.push_back(
                    run_test(test, fixture.category, engine, *embedder, seed, config.vertex, config.random_samples,
                             config.abort_on_violation));
            }
        }
    }
    result.rows = rows_from_trajectories(result.trajectories);
    return result;
}

// ---- reporting ------------------------------------------------------------

std::vector<ReportRow> rows_from_trajectories(const std::vector<TrajectoryRecord>& records) {
    // (category, engine) -> seed -> test aggregates
    std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, std::vector<double>>> grouped;
    for (const auto& r : records) grouped[{r.category, r.engine}][r.seed].push_back(r.stored_aggregate());
    std::vector<ReportRow> rows;
    for (const auto& [key, by_seed] : grouped) {
        ReportRow row{key.first, key.second, {}, {}, 0.0};
        for (const auto& [seed, scores] : by_seed) {
            double acc = 0.0;
            for (double s : scores) acc += s;
            row.seeds.push_back(seed);
            row.per_seed.push_back(acc / static_cast<double>(scores.size()));
        }
        double acc = 0.0;
        for (double s : row.per_seed) acc += s;
        row.mean = acc / static_cast<double>(row.per_seed.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string emit_report(const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw ArgumentError("no report rows");
    std::vector<std::string> cats;
    std::vector<std::string> engines;
    auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& c : categories()) {
        for (const auto& r : rows) {
            if (r.category == c) add_unique(cats, c);
        }
    }
    for (const auto& r : rows) {
        add_unique(cats, r.category);
        add_unique(engines, r.engine);
    }

    std::size_t label_width = std::string("Benchmarks").size();
    for (const auto& c : cats) label_width = std::max(label_width, c.size());
    label_width += 2;
    std::vector<std::size_t> widths;
    for (const auto& e : engines) widths.push_back(std::max<std::size_t>(e.size(), 5) + 2);

    auto pad_right = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    auto pad_left = [](std::string s, std::size_t w) {
        if (s.size() < w) s.insert(0, w - s.size(), ' ');
        return s;
    };
    auto cell = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string out = pad_right("Benchmarks", label_width);
    for (std::size_t e = 0; e < engines.size(); ++e) out += pad_left(engines[e], widths[e]);
    out += '\n';

    std::vector<double> totals(engines.size(), 0.0);
    std::vector<std::size_t> counts(engines.size(), 0);
    for (const auto& c : cats) {
        out += pad_right(c, label_width);
        for (std::size_t e = 0; e < engines.size(); ++e) {
            const ReportRow* found = nullptr;
            for (const auto& r : rows) {
                if (r.category == c && r.engine == engines[e]) found = &r;
            }
            if (found) {
                out += pad_left(cell(found->mean), widths[e]);
                totals[e] += found->mean;
                ++counts[e];
            } else {
                out += pad_left("-", widths[e]);
            }
        }
        out += '\n';
    }
    out += pad_right("Total", label_width);
    for (std::size_t e = 0; e < engines.size(); ++e) {
        out += pad_left(counts[e] ? cell(totals[e] / static_cast<double>(counts[e])) : "-", widths[e]);
    }
    out += '\n';
    return out;
}

namespace {

std::string path_safe(std::string s) {
    for (auto& c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    }
    return s;
}

}  // namespace

std::filesystem::path trajectory_path(const std::filesystem::path& out, const TrajectoryRecord& record) {
    return out / path_safe(record.category) / path_safe(record.engine) / path_safe(record.test) /
           ("seed-" + std::to_string(record.seed) + ".jsonl");
}

std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TrajectoryRecord> out;
    for (const auto& f : files) out.push_back(read_trajectory(f));
    return out;
}

}  // namespace nesy::harness

#include "nesy/harness/trajectory.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "nesy/errors.hpp"

namespace nesy::harness {

using nlohmann::json;

void StepRecord::set_score(const vertex::NodeScore& s) {
    raw_similarity = s.raw;
    node_score = s.score;
    bernoulli = s.bernoulli;
    sigma = s.sigma;
    z = s.z;
    z_rand = s.z_rand;
}

vertex::NodeScore StepRecord::score() const {
    return {raw_similarity, node_score, bernoulli, sigma, z, z_rand};
}

StepRecord& TrajectoryRecord::add_step(StepRecord step) {
    step.step = steps.size();
    steps.push_back(std::move(step));
    return steps.back();
}

double TrajectoryRecord::stored_aggregate() const {
    std::vector<vertex::NodeScore> scores;
    for (const auto& s : steps) scores.push_back(s.score());
    return vertex::aggregate(scores);
}

json step_to_json(const TrajectoryRecord& run, const StepRecord& s) {
    // nlohmann::json keeps keys sorted, which gives a stable byte layout
    return json{{"run_id", run.run_id},
                {"seed", run.seed},
                {"engine", run.engine},
                {"completion_engine", run.completion_engine},
                {"embedding_engine", run.embedding_engine},
                {"category", run.category},
                {"test", run.test},
                {"step", s.step},
                {"node_id", s.node_id},
                {"stage", s.stage},
                {"instruction", s.instruction},
                {"generated", s.generated},
                {"references", s.references},
                {"randoms", s.randoms},
                {"raw_similarity", s.raw_similarity},
                {"node_score", s.node_score},
                {"bernoulli", s.bernoulli},
                {"sigma", s.sigma},
                {"z", s.z},
                {"z_rand", s.z_rand}};
}

std::string to_jsonl(const TrajectoryRecord& record) {
    std::string out;
    for (const auto& s : record.steps) {
        out += step_to_json(record, s).dump();
        out += '\n';
    }
    return out;
}

namespace {

template <typename T>
T field(const json& j, const char* key, std::size_t lineno) {
    if (!j.contains(key)) throw ParseError(lineno, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(lineno, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

TrajectoryRecord parse_jsonl(const std::string& text) {
    TrajectoryRecord rec;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(lineno, "not a JSON object");
        auto run_id = field<std::string>(j, "run_id", lineno);
        if (first) {
            rec.run_id = run_id;
            rec.seed = field<std::uint64_t>(j, "seed", lineno);
            rec.engine = field<std::string>(j, "engine", lineno);
            rec.completion_engine = field<std::string>(j, "completion_engine", lineno);
            rec.embedding_engine = field<std::string>(j, "embedding_engine", lineno);
            rec.category = field<std::string>(j, "category", lineno);
            rec.test = field<std::string>(j, "test", lineno);
            first = false;
        } else if (run_id != rec.run_id) {
            throw ParseError(lineno, "run_id changes within one trajectory file");
        }
        StepRecord s;
        s.step = field<std::size_t>(j, "step", lineno);
        if (s.step != rec.steps.size()) {
            throw ParseError(lineno, "step index " + std::to_string(s.step) + " is not contiguous");
        }
        s.node_id = field<std::string>(j, "node_id", lineno);
        s.stage = field<std::string>(j, "stage", lineno);
        s.instruction = field<std::string>(j, "instruction", lineno);
        s.generated = field<std::string>(j, "generated", lineno);
        s.references = field<std::vector<std::string>>(j, "references", lineno);
        s.randoms = field<std::vector<std::string>>(j, "randoms", lineno);
        s.raw_similarity = field<double>(j, "raw_similarity", lineno);
        s.node_score = field<double>(j, "node_score", lineno);
        s.bernoulli = field<bool>(j, "bernoulli", lineno);
        s.sigma = field<double>(j, "sigma", lineno);
        s.z = field<double>(j, "z", lineno);
        s.z_rand = field<double>(j, "z_rand", lineno);
        if (!(s.node_score >= 0.0 && s.node_score <= 1.0)) throw ParseError(lineno, "node_score outside [0, 1]");
        rec.steps.push_back(std::move(s));
    }
    if (rec.steps.empty()) throw ArgumentError("trajectory is empty");
    return rec;
}

void record_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trajectory file " + path.string());
    out << to_jsonl(record);
}

TrajectoryRecord read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open trajectory file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_jsonl(buf.str());
}

vertex::NodeScore score_texts(EmbeddingEngine& embedder, const std::string& generated,
                              const std::vector<std::string>& references, const std::vector<std::string>& randoms,
                              const vertex::VertexConfig& cfg) {
    if (references.empty()) throw ArgumentError("similarity step needs at least one reference");
    std::vector<std::string> texts;
    texts.reserve(1 + references.size() + randoms.size());
    texts.push_back(generated);
    texts.insert(texts.end(), references.begin(), references.end());
    texts.insert(texts.end(), randoms.begin(), randoms.end());
    auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) throw ProtocolError("embedding count mismatch", {});

    const std::size_t dim = vectors.front().size();
    vertex::SampleSet gen(dim, vertex::Role::generated);
    vertex::SampleSet ref(dim, vertex::Role::reference);
    vertex::SampleSet rnd(dim, vertex::Role::random);
    gen.add(vectors[0]);
    for (std::size_t i = 0; i < references.size(); ++i) ref.add(vectors[1 + i]);
    for (std::size_t i = 0; i < randoms.size(); ++i) rnd.add(vectors[1 + references.size() + i]);
    return vertex::node_vertex_score(gen, ref, rnd, cfg);
}

std::unique_ptr<EmbeddingEngine> embedder_from_id(const std::string& id) {
    static const std::regex pattern(R"(mock-embedding:dim=(\d+):seed=(\d+))");
    std::smatch m;
    if (!std::regex_match(id, m, pattern)) {
        throw ConfigError("cannot rebuild embedder '" + id + "'; pass an embedding engine explicitly");
    }
    return std::make_unique<MockEmbedding>(std::stoull(m[1].str()), std::stoull(m[2].str()));
}

vertex::TrajectoryScore score_trajectory(const TrajectoryRecord& record, const vertex::VertexConfig& cfg,
                                         EmbeddingEngine& embedder) {
    std::vector<vertex::NodeInput> nodes;
    nodes.reserve(record.steps.size());
    for (const auto& s : record.steps) {
        if (s.bernoulli) {
            nodes.emplace_back(s.node_score >= 0.5);
        } else {
            nodes.emplace_back(score_texts(embedder, s.generated, s.references, s.randoms, cfg));
        }
    }
    return vertex::trajectory_vertex_score(nodes, cfg);
}

vertex::TrajectoryScore score_trajectory_file(const std::filesystem::path& path, const vertex::VertexConfig& cfg,
                                              EmbeddingEngine* embedder) {
    auto record = read_trajectory(path);
    std::unique_ptr<EmbeddingEngine> owned;
    if (!embedder) {
        owned = embedder_from_id(record.embedding_engine);
        embedder = owned.get();
    }
    return score_trajectory(record, cfg, *embedder);
}

}  // namespace nesy::harness

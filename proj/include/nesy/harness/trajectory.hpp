#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/engine.hpp"
#include "nesy/vertex/score.hpp"

namespace nesy::harness {

/// One scored node of a run.
struct StepRecord {
    std::size_t step = 0;
    std::string node_id;
    std::string stage;  // plan | capability | task
    std::string instruction;
    std::string generated;
    std::vector<std::string> references;
    std::vector<std::string> randoms;
    double raw_similarity = 0.0;
    double node_score = 0.0;
    bool bernoulli = false;
    double sigma = 0.0;
    double z = 0.0;
    double z_rand = 0.0;

    void set_score(const vertex::NodeScore& s);
    vertex::NodeScore score() const;
};

/// A single run (one test under one seed and one engine). Serialized as JSONL
/// with one step per line; every line repeats the run fields so a line can
/// be read on its own.
struct TrajectoryRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string engine;             // report column label
    std::string completion_engine;  // engine id()
    std::string embedding_engine;   // embedder id()
    std::string category;
    std::string test;
    std::vector<StepRecord> steps;

    /// Appends a step, assigning the next contiguous step index.
    StepRecord& add_step(StepRecord step);
    double stored_aggregate() const;
};

nlohmann::json step_to_json(const TrajectoryRecord& run, const StepRecord& step);
std::string to_jsonl(const TrajectoryRecord& record);
TrajectoryRecord parse_jsonl(const std::string& text);

/// Writes the record, creating parent directories.
void record_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path);
/// ParseError (with line number) on malformed lines, ArgumentError on an empty file.
TrajectoryRecord read_trajectory(const std::filesystem::path& path);

/// Embeds generated, references and randoms in one call and scores the node.
vertex::NodeScore score_texts(EmbeddingEngine& embedder, const std::string& generated,
                              const std::vector<std::string>& references, const std::vector<std::string>& randoms,
                              const vertex::VertexConfig& cfg);

/// Rebuilds a mock embedder from its id ("mock-embedding:dim=D:seed=S").
/// Other ids need an explicit embedder; ConfigError otherwise.
std::unique_ptr<EmbeddingEngine> embedder_from_id(const std::string& id);

/// Re-embeds similarity steps and re-scores them; Bernoulli steps keep their
/// recorded outcome.
vertex::TrajectoryScore score_trajectory(const TrajectoryRecord& record, const vertex::VertexConfig& cfg,
                                         EmbeddingEngine& embedder);
vertex::TrajectoryScore score_trajectory_file(const std::filesystem::path& path, const vertex::VertexConfig& cfg,
                                              EmbeddingEngine* embedder = nullptr);

}  // namespace nesy::harness

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/vertex/sample_set.hpp"

namespace nesy::vertex {

enum class Normalization {
    literal,     ///< clamp(raw / z - z_rand)
    recentered,  ///< clamp((raw / z - z_rand) / (1 - z_rand))
};

/// Unset fields are resolved per node from the samples:
/// sigma by the median heuristic, z from disjoint halves of the references,
/// z_rand from the random set against the references.
struct VertexConfig {
    std::optional<double> sigma;
    std::optional<double> z;
    std::optional<double> z_rand;
    Normalization normalization = Normalization::literal;

    /// Throws ConfigError on sigma <= 0, z <= 0, z_rand < 0 or non-finite values.
    void validate() const;

    /// {"sigma": number | "median", "z": number | null, "z_rand": number | null,
    ///  "normalization": "literal" | "recentered"}; missing keys keep defaults.
    static VertexConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct NodeScore {
    double raw = 0.0;  ///< cross similarity; 0 for Bernoulli nodes
    double score = 0.0;
    bool bernoulli = false;
    double sigma = 0.0;
    double z = 0.0;
    double z_rand = 0.0;
};

struct TrajectoryScore {
    std::vector<NodeScore> nodes;
    double aggregate = 0.0;
};

/// Constants used to score one node.
struct ResolvedConstants {
    double sigma;
    double z;
    double z_rand;
};

/// Bandwidth pool is the reference set when it has two or more samples,
/// otherwise every sample supplied; a pool of one falls back to 1.0.
ResolvedConstants resolve_constants(const SampleSet& gen, const SampleSet& ref, const SampleSet& rand,
                                    const VertexConfig& cfg);

NodeScore node_vertex_score(const SampleSet& gen, const SampleSet& ref, const SampleSet& rand,
                            const VertexConfig& cfg);

NodeScore bernoulli_node_score(bool success);

struct SimilarityNode {
    SampleSet generated;
    SampleSet reference;
    SampleSet random;
};

/// A node is either scored from samples, a pass/fail trial, or already scored.
using NodeInput = std::variant<SimilarityNode, bool, NodeScore>;

/// Scores every node (in parallel) and averages them.
TrajectoryScore trajectory_vertex_score(const std::vector<NodeInput>& nodes, const VertexConfig& cfg);

/// Arithmetic mean of node scores. Throws ArgumentError when empty.
double aggregate(const std::vector<NodeScore>& nodes);

}  // namespace nesy::vertex

#include "nesy/vertex/score.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "nesy/errors.hpp"
#include "nesy/vertex/kernels.hpp"

namespace nesy::vertex {

namespace {

void check_positive(const std::optional<double>& v, const char* name) {
    if (v && (!std::isfinite(*v) || *v <= 0.0)) throw ConfigError(std::string(name) + " must be positive and finite");
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ConfigError(std::string("vertex.") + key + " must be a number or null");
    return j.at(key).get<double>();
}

double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

}  // namespace

void VertexConfig::validate() const {
    check_positive(sigma, "sigma");
    check_positive(z, "z");
    if (z_rand && (!std::isfinite(*z_rand) || *z_rand < 0.0)) throw ConfigError("z_rand must be finite and non-negative");
}

VertexConfig VertexConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("vertex config must be an object");
    VertexConfig cfg;
    if (j.contains("sigma")) {
        const auto& s = j.at("sigma");
        if (s.is_string()) {
            if (s.get<std::string>() != "median") throw ConfigError("sigma must be a number or \"median\"");
        } else {
            cfg.sigma = optional_number(j, "sigma");
        }
    }
    cfg.z = optional_number(j, "z");
    cfg.z_rand = optional_number(j, "z_rand");
    if (j.contains("normalization")) {
        auto n = j.at("normalization").get<std::string>();
        if (n == "literal") cfg.normalization = Normalization::literal;
        else if (n == "recentered") cfg.normalization = Normalization::recentered;
        else throw ConfigError("unknown normalization '" + n + "' (expected literal or recentered)");
    }
    cfg.validate();
    return cfg;
}

nlohmann::json VertexConfig::to_json() const {
    nlohmann::json j;
    j["sigma"] = sigma ? nlohmann::json(*sigma) : nlohmann::json("median");
    j["z"] = z ? nlohmann::json(*z) : nlohmann::json(nullptr);
    j["z_rand"] = z_rand ? nlohmann::json(*z_rand) : nlohmann::json(nullptr);
    j["normalization"] = normalization == Normalization::literal ? "literal" : "recentered";
    return j;
}

ResolvedConstants resolve_constants(const SampleSet& gen, const SampleSet& ref, const SampleSet& rand,
                                    const VertexConfig& cfg) {
    cfg.validate();
    if (ref.empty()) throw ArgumentError("reference sample set is empty");

    double sigma = 1.0;
    if (cfg.sigma) {
        sigma = *cfg.sigma;
    } else if (ref.size() >= 2) {
        sigma = median_heuristic_sigma(ref);
    } else {
        SampleSet pool = ref;
        if (!rand.empty()) pool = pool.concat(rand);
        if (!gen.empty()) pool = pool.concat(gen);
        if (pool.size() >= 2) sigma = median_heuristic_sigma(pool);
    }

    double z = 0.0;
    if (cfg.z) {
        z = *cfg.z;
    } else if (ref.size() >= 2) {
        auto half = ref.size() / 2;
        z = mmd2_cross(ref.slice(0, half), ref.slice(half, ref.size()), sigma);
    } else {
        z = mmd2_cross(ref, ref, sigma);
    }
    if (!(z > 0.0)) throw ConfigError("reference rescale constant z resolved to a non-positive value");

    double z_rand = 0.0;
    if (cfg.z_rand) {
        z_rand = *cfg.z_rand;
    } else {
        if (rand.empty()) throw ArgumentError("random sample set is empty and z_rand is not configured");
        z_rand = mmd2_cross(rand, ref, sigma) / z;
    }
    return {sigma, z, z_rand};
}

NodeScore node_vertex_score(const SampleSet& gen, const SampleSet& ref, const SampleSet& rand,
                            const VertexConfig& cfg) {
    if (gen.empty()) throw ArgumentError("generated sample set is empty");
    auto c = resolve_constants(gen, ref, rand, cfg);
    NodeScore out;
    out.sigma = c.sigma;
    out.z = c.z;
    out.z_rand = c.z_rand;
    out.raw = mmd2_cross(gen, ref, c.sigma);
    // Same expression as the z_rand resolution so gen == rand cancels exactly.
    double shifted = out.raw / c.z - c.z_rand;
    if (cfg.normalization == Normalization::recentered) {
        double span = 1.0 - c.z_rand;
        if (!(span > 0.0)) throw ConfigError("recentered normalization needs z_rand < 1");
        shifted /= span;
    }
    out.score = clamp01(shifted);
    return out;
}

NodeScore bernoulli_node_score(bool success) {
    NodeScore out;
    out.bernoulli = true;
    out.score = success ? 1.0 : 0.0;
    return out;
}

double aggregate(const std::vector<NodeScore>& nodes) {
    if (nodes.empty()) throw ArgumentError("cannot aggregate an empty trajectory");
    double acc = 0.0;
    for (const auto& n : nodes) acc += n.score;
    return acc / static_cast<double>(nodes.size());
}

TrajectoryScore trajectory_vertex_score(const std::vector<NodeInput>& nodes, const VertexConfig& cfg) {
    if (nodes.empty()) throw ArgumentError("trajectory has no nodes");
    cfg.validate();
    TrajectoryScore out;
    out.nodes.resize(nodes.size());
    std::vector<std::exception_ptr> errors(nodes.size());
    const auto count = static_cast<std::ptrdiff_t>(nodes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto idx = static_cast<std::size_t>(i);
        try {
            out.nodes[idx] = std::visit(
                [&](const auto& n) -> NodeScore {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, SimilarityNode>) {
                        return node_vertex_score(n.generated, n.reference, n.random, cfg);
                    } else if constexpr (std::is_same_v<T, bool>) {
                        return bernoulli_node_score(n);
                    } else {
                        NodeScore s = n;
                        s.score = clamp01(s.score);
                        return s;
                    }
                },
                nodes[idx]);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    out.aggregate = aggregate(out.nodes);
    return out;
}

}  // namespace nesy::vertex

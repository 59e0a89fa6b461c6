#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/engine.hpp"
#include "nesy/harness/trajectory.hpp"
#include "nesy/vertex/score.hpp"

namespace nesy::harness {

/// associations, modality, code, logic, graphs
const std::vector<std::string>& categories();

enum class EngineKind { scripted, random, live };

struct EngineSpec {
    std::string name;  // report column
    EngineKind kind = EngineKind::scripted;
    EngineConfig completion;  // used by live engines
};

struct EmbeddingSpec {
    bool live = false;
    std::size_t dim = 768;
    std::uint64_t seed = 0;
    EngineConfig config;  // used when live

    std::unique_ptr<EmbeddingEngine> make() const;
};

struct SuiteConfig {
    std::string category;
    std::vector<std::uint64_t> seeds;
    std::vector<EngineSpec> engines;
    EmbeddingSpec embedding;
    vertex::VertexConfig vertex;
    std::filesystem::path fixtures_dir;
    std::size_t random_samples = 8;
    /// "on_violation": "record" keeps going with a failed node; "abort" stops
    /// the run with the ConstraintViolation.
    bool abort_on_violation = false;

    /// ConfigError on an unknown category (the message lists valid ones),
    /// no seeds, no engines or duplicate engine names.
    void validate() const;
};

/// Parses a config object, filling defaults: 8 seeds (0..7), scripted and
/// random engines, a 768-dimensional mock embedder, median bandwidth.
SuiteConfig parse_config(const nlohmann::json& j);
SuiteConfig load_config(const std::filesystem::path& path);

/// One engine call of a fixture test. `input` is either literal text or a
/// reference to an earlier step's output; absent means the previous output.
struct FixtureStep {
    std::string op;
    std::string instruction;
    std::optional<Payload> input;
    std::optional<std::size_t> input_ref;
    std::string argument;
    std::optional<std::string> insert;
    std::optional<std::string> output_template;
    std::string order = "ascending";
    std::string match;   // scripted-engine pattern
    std::string answer;  // scripted-engine reply
    std::vector<std::string> references;
};

struct FixtureTest {
    std::string name;
    std::vector<FixtureStep> steps;
};

struct Fixture {
    std::string category;
    std::vector<FixtureTest> tests;
};

/// Reads <dir>/<category>.json. ConfigError when missing or malformed.
Fixture load_fixture(const std::filesystem::path& dir, const std::string& category);

std::unique_ptr<CompletionEngine> make_engine(const EngineSpec& spec, const FixtureTest& test, std::uint64_t seed);

/// Runs one test under one engine and seed. Step failures other than an
/// unreachable engine are recorded as Bernoulli-0 nodes, unless
/// `abort_on_violation` is set and the failure is a ConstraintViolation.
TrajectoryRecord run_test(const FixtureTest& test, const std::string& category, const EngineSpec& engine,
                          EmbeddingEngine& embedder, std::uint64_t seed, const vertex::VertexConfig& cfg,
                          std::size_t random_samples = 8, bool abort_on_violation = false);

struct ReportRow {
    std::string category;
    std::string engine;
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed;  // mean over tests for each seed
    double mean = 0.0;
};

struct SuiteResult {
    std::vector<TrajectoryRecord> trajectories;
    std::vector<ReportRow> rows;
};

/// Loads and checks the fixture before any engine call, then runs every
/// test for every engine and seed.
SuiteResult run_suite(const SuiteConfig& config);

/// Groups trajectories by (category, engine) and averages stored scores.
/// Rows come out sorted by category then engine name, so a fresh run and a
/// report over its output directory print the same table.
std::vector<ReportRow> rows_from_trajectories(const std::vector<TrajectoryRecord>& records);

/// Fixed-width table: categories as rows, engines as columns, then Total.
std::string emit_report(const std::vector<ReportRow>& rows);

/// <out>/<category>/<engine>/<test>/seed-<seed>.jsonl
std::filesystem::path trajectory_path(const std::filesystem::path& out, const TrajectoryRecord& record);
/// Every *.jsonl file below `dir`, in path order.
std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& dir);

}  // namespace nesy::harness

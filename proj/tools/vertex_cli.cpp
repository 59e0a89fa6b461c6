// vertex: run category suites, re-score trajectories, print score reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nesy/errors.hpp"
#include "nesy/harness/suite.hpp"
#include "nesy/harness/trajectory.hpp"

namespace fs = std::filesystem;
using namespace nesy;

namespace {

int cmd_run(const std::string& category, const fs::path& config_path, std::optional<std::size_t> seeds,
            const fs::path& out) {
    auto cfg = harness::load_config(config_path);
    cfg.category = category;
    if (seeds) {
        if (*seeds == 0) throw ConfigError("--seeds must be at least 1");
        cfg.seeds.clear();
        for (std::size_t i = 0; i < *seeds; ++i) cfg.seeds.push_back(i);
    }
    auto result = harness::run_suite(cfg);
    for (const auto& rec : result.trajectories) harness::record_trajectory(rec, harness::trajectory_path(out, rec));
    std::cout << harness::emit_report(result.rows);
    return 0;
}

int cmd_score(const fs::path& trajectory, std::optional<double> sigma, std::optional<double> z) {
    vertex::VertexConfig cfg;
    cfg.sigma = sigma;
    cfg.z = z;
    cfg.validate();
    auto rec = harness::read_trajectory(trajectory);
    auto embedder = harness::embedder_from_id(rec.embedding_engine);
    auto scored = harness::score_trajectory(rec, cfg, *embedder);
    std::printf("%-6s %-12s %-10s %10s %8s\n", "step", "stage", "node", "raw", "score");
    for (std::size_t i = 0; i < scored.nodes.size(); ++i) {
        const auto& s = rec.steps[i];
        const auto& n = scored.nodes[i];
        std::printf("%-6zu %-12s %-10s %10.6f %8.4f%s\n", s.step, s.stage.c_str(), s.node_id.c_str(), n.raw, n.score,
                    n.bernoulli ? "  (pass/fail)" : "");
    }
    std::printf("aggregate %.6f\n", scored.aggregate);
    return 0;
}

int cmd_report(const fs::path& in) {
    auto records = harness::load_trajectories(in);
    if (records.empty()) throw ConfigError("no trajectory files under " + in.string());
    std::cout << harness::emit_report(harness::rows_from_trajectories(records));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory evaluation for multi-step generative runs"};
    app.require_subcommand(1);

    std::string category;
    std::string config;
    std::optional<std::size_t> seeds;
    std::string out = "runs";
    auto* run = app.add_subcommand("run", "Run a category suite and record trajectories");
    run->add_option("--category", category, "associations | modality | code | logic | graphs")->required();
    run->add_option("--config", config, "Suite config JSON")->required();
    run->add_option("--seeds", seeds, "Use seeds 0..N-1 instead of the configured list");
    run->add_option("--out", out, "Output directory for trajectory files")->capture_default_str();

    std::string trajectory;
    std::optional<double> sigma;
    std::optional<double> z;
    auto* score = app.add_subcommand("score", "Re-score a recorded trajectory");
    score->add_option("--trajectory", trajectory, "Trajectory JSONL file")->required();
    score->add_option("--sigma", sigma, "Kernel bandwidth (default: median heuristic)");
    score->add_option("--z", z, "Reference rescale constant (default: from the references)");

    std::string in;
    auto* report = app.add_subcommand("report", "Summarize recorded trajectories");
    report->add_option("--in", in, "Directory of trajectory files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(category, config, seeds, out);
        if (*score) return cmd_score(trajectory, sigma, z);
        if (*report) return cmd_report(in);
    } catch (const Error& e) {
        std::cerr << "vertex: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "vertex: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

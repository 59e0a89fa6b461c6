#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nesy/composition.hpp"
#include "nesy/errors.hpp"
#include "nesy/text.hpp"
#include "oracles.hpp"

using namespace nesy;

namespace {

using Script = std::map<std::string, std::string>;

struct Rig {
    Graph g;
    MockCompletion engine;
    MockEmbedding embedder{768, 0};
    Runtime rt;

    explicit Rig(std::map<std::string, std::string> script, std::size_t budget = 4096)
        : engine(std::move(script), 0, budget), rt{g, engine, &embedder, nullptr, {}, {}} {}

    std::string text(NodeId id) const { return render(g.node(id).payload); }
};

// Appends a fixed suffix without calling an engine.
Expression suffix(const std::string& s) {
    return Expression("Suffix" + s, [s](Runtime& rt, NodeId in) {
        return rt.graph.derive(in, render(rt.graph.node(in).payload) + s);
    });
}

std::string words(std::size_t n, const std::string& stem = "w") {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += stem + std::to_string(i) + (i % 9 == 8 ? "\n" : " ");
    return out;
}

// Connected components of the graph with an edge wherever cosine >= threshold.
std::vector<std::vector<std::size_t>> pairwise_components(const std::vector<std::vector<double>>& v, double threshold) {
    std::vector<std::size_t> comp(v.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](std::size_t x) {
        while (comp[x] != x) x = comp[x];
        return x;
    };
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (oracle::cosine(v[i], v[j]) >= threshold) comp[find(j)] = find(i);
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < v.size(); ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [_, members] : groups) out.push_back(members);
    return out;
}

}  // namespace

TEST(Sequence, SingleStepEqualsDirectCall) {
    Rig a(fixtures::chain_script()), b(fixtures::chain_script());
    auto ia = a.g.make_symbol(std::string(fixtures::kChainInput));
    auto ib = b.g.make_symbol(std::string(fixtures::kChainInput));
    auto via_sequence = sequence_eval(a.rt, SequencePlan{{components::clean()}}, ia);
    auto direct = components::clean()(b.rt, ib);
    EXPECT_EQ(a.text(via_sequence), b.text(direct));
    EXPECT_EQ(a.g.size(), b.g.size());
}

TEST(Sequence, CleanTranslateOutlineGolden) {
    Rig r(fixtures::chain_script());
    auto in = r.g.make_symbol(std::string(fixtures::kChainInput));
    auto out = sequence_eval(
        r.rt, SequencePlan{{components::clean(), components::translate_to("German"), components::outline()}}, in);
    EXPECT_EQ(r.text(out), "- Flut\n- zweimal täglich");
    auto ex = r.g.export_graph(in);
    ASSERT_EQ(ex.nodes.size(), 4u);
    EXPECT_EQ(ex.edges.size(), 3u);
    nlohmann::json chain = ex.to_json();
    for (auto& n : chain["nodes"]) {
        auto id = NodeId{std::stoull(n["id"].get<std::string>().substr(1))};
        for (const auto& [k, v] : r.g.node(id).metadata) n["metadata"][k] = v;
    }
    auto actual = chain.dump(2) + "\n";
    EXPECT_EQ(actual, fixtures::golden("chain_graph.json", actual));
}

TEST(Sequence, Associativity) {
    auto run = [](bool left_nested) {
        Rig r(fixtures::chain_script());
        auto f = components::clean(), g = components::translate_to("German"), h = components::outline();
        Expression plan = left_nested ? sequence({{sequence({{f, g}}), h}}) : sequence({{f, sequence({{g, h}})}});
        auto in = r.g.make_symbol(std::string(fixtures::kChainInput));
        auto out = plan(r.rt, in);
        return std::make_pair(r.text(out), r.g.size());
    };
    EXPECT_EQ(run(true), run(false));
}

TEST(Sequence, KStepsMakeAChainOfKNodes) {
    Rig r({});
    auto in = r.g.make_symbol(std::string("x"));
    auto out = sequence_eval(r.rt, SequencePlan{{suffix("a"), suffix("b"), suffix("c"), suffix("d")}}, in);
    EXPECT_EQ(r.g.size(), 5u);
    EXPECT_EQ(r.text(out), "xabcd");
    std::size_t depth = 0;
    for (NodeId cur = out; cur != in; cur = *r.g.node(cur).parent) ++depth;
    EXPECT_EQ(depth, 4u);
}

TEST(Sequence, FailingStepCarriesIndex) {
    Rig r({});
    auto boom = Expression("Boom", [](Runtime&, NodeId) -> NodeId { throw ExecutionError("boom"); });
    auto in = r.g.make_symbol(std::string("x"));
    try {
        sequence_eval(r.rt, SequencePlan{{suffix("a"), boom, suffix("c")}}, in);
        FAIL();
    } catch (const SequenceError& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_EQ(e.kind(), ErrorKind::execution);
    }
    EXPECT_THROW(sequence_eval(r.rt, SequencePlan{}, in), ArgumentError);
}

TEST(Sequence, StepMustDeriveFromItsInput) {
    Rig r({});
    auto stray = Expression("Stray", [](Runtime& rt, NodeId) { return rt.graph.make_symbol(std::string("orphan")); });
    auto in = r.g.make_symbol(std::string("x"));
    EXPECT_THROW(sequence_eval(r.rt, SequencePlan{{stray}}, in), SequenceError);
}

TEST(Stream, SmallInputIsOneChunk) {
    auto chunks = chunk_text("a short text", {100, 0});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, "a short text");
}

TEST(Stream, TenBudgetsPartitionTheText) {
    const std::size_t budget = 133;  // exactly 100 words per chunk
    auto text = words(1000);
    auto chunks = chunk_text(text, {budget, 0});
    ASSERT_EQ(chunks.size(), 10u);
    std::string joined;
    for (const auto& c : chunks) {
        joined += c.text;
        EXPECT_LE(estimate_tokens(c.text), budget);
    }
    EXPECT_EQ(joined, text);
}

TEST(Stream, PartitionHoldsForOddSizes) {
    for (std::size_t n : {1u, 7u, 99u, 101u, 517u}) {
        auto text = "  " + words(n) + "\n";
        std::string joined;
        for (const auto& c : chunk_text(text, {50, 0})) joined += c.text;
        EXPECT_EQ(joined, text) << n;
    }
}

TEST(Stream, OverlapSharesTheLargestFittingWordRun) {
    auto text = words(600);
    auto chunks = chunk_text(text, {256, 64});
    ASSERT_GT(chunks.size(), 2u);
    for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
        auto a = text::split_whitespace(chunks[i].text);
        auto b = text::split_whitespace(chunks[i + 1].text);
        EXPECT_LE(estimate_tokens(chunks[i].text), 256u);
        // longest suffix of a that is a prefix of b
        std::size_t shared = 0;
        for (std::size_t k = std::min(a.size(), b.size()); k > 0; --k) {
            if (std::equal(a.end() - static_cast<long>(k), a.end(), b.begin())) {
                shared = k;
                break;
            }
        }
        std::vector<std::string> overlap(b.begin(), b.begin() + static_cast<long>(shared));
        auto overlap_tokens = estimate_tokens(text::join(overlap, " "));
        overlap.push_back("extra");
        EXPECT_LE(overlap_tokens, 64u);
        EXPECT_GT(estimate_tokens(text::join(overlap, " ")), 64u);
    }
}

TEST(Stream, ChunkSpecValidation) {
    EXPECT_THROW(chunk_text("x", {0, 0}), ConfigError);
    EXPECT_THROW(chunk_text("x", {10, 10}), ConfigError);
}

TEST(Stream, YieldsInChunkOrder) {
    Rig r({});
    auto in = r.g.make_symbol(words(300));
    auto stream = stream_eval(r.rt, SequencePlan{{suffix("!")}}, in, {100, 0});
    auto outs = stream.collect();
    ASSERT_EQ(outs.size(), stream.size());
    for (std::size_t i = 0; i < outs.size(); ++i) EXPECT_EQ(r.text(outs[i]), stream.chunks()[i].text + "!");
    EXPECT_FALSE(stream.next().has_value());
}

TEST(Stream, OverBudgetIsRejectedBeforeAnyCall) {
    Rig r({}, 60);
    auto in = r.g.make_symbol(words(500));
    EXPECT_THROW(stream_eval(r.rt, SequencePlan{{components::summarize()}}, in, {55, 0}), ConfigError);
    EXPECT_EQ(r.engine.calls(), 0u);
    EXPECT_NO_THROW(stream_eval(r.rt, SequencePlan{{components::summarize()}}, in, {40, 0}));
}

TEST(Cluster, IdenticalChunksMerge) {
    Rig r({});
    std::vector<NodeId> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(r.g.make_symbol(std::string("same words here")));
    auto res = cluster_merge(r.rt, ids, 0.9);
    ASSERT_EQ(res.clusters.size(), 1u);
    EXPECT_EQ(res.clusters[0].members.size(), 4u);
}

TEST(Cluster, UnreachableThresholdSplitsEverything) {
    Rig r({});
    std::vector<NodeId> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(r.g.make_symbol(std::string("same words here")));
    EXPECT_EQ(cluster_merge(r.rt, ids, 1.01).clusters.size(), 4u);
}

TEST(Cluster, SixChunkFixtureMatchesPairwiseOracle) {
    Rig r(fixtures::cluster_label_script());
    std::vector<NodeId> ids;
    std::vector<std::vector<double>> vecs;
    for (const auto& t : fixtures::cluster_chunks()) {
        ids.push_back(r.g.make_symbol(t));
        vecs.push_back(r.embedder.embed_text(t));
    }
    auto res = cluster_merge(r.rt, ids);
    auto expected = pairwise_components(vecs, kDefaultClusterThreshold);
    ASSERT_EQ(expected.size(), 3u);
    ASSERT_EQ(res.clusters.size(), expected.size());
    std::set<std::size_t> seen;
    for (std::size_t c = 0; c < expected.size(); ++c) {
        EXPECT_EQ(res.clusters[c].members, expected[c]);
        EXPECT_FALSE(res.clusters[c].label.empty());
        for (auto m : res.clusters[c].members) EXPECT_TRUE(seen.insert(m).second);
    }
    EXPECT_EQ(seen.size(), ids.size());
    auto actual = fixtures::cluster_transcript();
    EXPECT_EQ(actual, fixtures::golden("cluster_fixture.json", actual));
}

TEST(Cluster, MergedTextKeepsOriginalOrder) {
    Rig r({});
    auto chunks = fixtures::cluster_chunks();
    std::vector<NodeId> ids;
    for (const auto& t : chunks) ids.push_back(r.g.make_symbol(t));
    auto res = cluster_merge(r.rt, ids);
    EXPECT_EQ(res.clusters[0].merged_text, chunks[0] + "\n" + chunks[3]);
    EXPECT_EQ(r.engine.calls(), res.clusters.size());
}

TEST(Cluster, NeedsEmbedder) {
    Rig r({});
    r.rt.embedder = nullptr;
    EXPECT_THROW(cluster_merge(r.rt, {r.g.make_symbol(std::string("x"))}), ConfigError);
}

TEST(Try, ImmediateSuccessMakesNoCorrection) {
    Rig r({});
    auto in = r.g.make_symbol(std::string("a = int(\"3\")"));
    auto out = try_eval(r.rt, fixtures::execute_behavior(), in, 2);
    EXPECT_EQ(r.text(out), "a = 3");
    EXPECT_EQ(r.engine.calls(), 0u);
}

TEST(Try, OneCorrectionFixesTheLiteral) {
    std::vector<EngineRequest> seen;
    Graph g;
    MockCompletion inner(fixtures::try_script(), 0);
    FunctionCompletion engine([&](const EngineRequest& req) {
        seen.push_back(req);
        return inner.complete(req).text;
    });
    Runtime rt{g, engine, nullptr, nullptr, {}, {}};
    auto in = g.make_symbol(std::string("a = int(\"3,\")"));
    auto out = try_eval(rt, fixtures::execute_behavior(), in, 2);
    EXPECT_EQ(render(g.node(out).payload), "a = 3");
    ASSERT_EQ(seen.size(), 1u);
    const auto& analysis = seen[0][Segment::user_input];
    EXPECT_NE(analysis.find("a = int(\"3,\")"), std::string::npos);
    EXPECT_NE(analysis.find("Traceback"), std::string::npos);
    EXPECT_NE(analysis.find("invalid literal"), std::string::npos);
}

TEST(Try, ExhaustionAfterRetriesPlusOne) {
    Rig r({});
    std::size_t attempts = 0;
    auto always = Expression("Always", [&](Runtime&, NodeId) -> NodeId {
        ++attempts;
        throw ExecutionError("still broken", "out");
    });
    auto in = r.g.make_symbol(std::string("x"));
    try {
        try_eval(r.rt, always, in, 2);
        FAIL();
    } catch (const RetryExhaustedError& e) {
        EXPECT_EQ(e.history().size(), 3u);
        EXPECT_EQ(e.history()[0].input, "x");
        EXPECT_EQ(e.history()[0].output, "out");
        EXPECT_EQ(e.kind(), ErrorKind::execution);
    }
    EXPECT_EQ(attempts, 3u);
    EXPECT_EQ(r.engine.calls(), 2u);
}

TEST(Try, LastAttemptOnlyInAnalysis) {
    std::vector<std::string> analyses;
    Graph g;
    int n = 0;
    FunctionCompletion engine([&](const EngineRequest& req) {
        analyses.push_back(req[Segment::user_input]);
        return "attempt" + std::to_string(++n);
    });
    Runtime rt{g, engine, nullptr, nullptr, {}, {}};
    auto in = g.make_symbol(std::string("attempt0"));
    EXPECT_THROW(try_eval(rt, fixtures::execute_behavior(), in, 3), RetryExhaustedError);
    ASSERT_EQ(analyses.size(), 3u);
    EXPECT_NE(analyses[2].find("attempt2"), std::string::npos);
    EXPECT_EQ(analyses[2].find("attempt0"), std::string::npos);
}

TEST(DeriveSubprocess, ScriptedSpecRoundTrip) {
    Rig r(Script{{"summarize in one sentence",
            "OPERATION: Condense the input into a single sentence.\nEXAMPLE: The sun rose. Birds sang. =>Morning came."},
           {"Condense the input into a single sentence.", "Tides rise twice daily."}});
    auto ctx = r.g.make_symbol(std::string("notes"));
    auto expr = derive_subprocess(r.rt, "summarize in one sentence", ctx);
    EXPECT_EQ(expr.metadata().at("operation"), "Condense the input into a single sentence.");
    EXPECT_EQ(expr.metadata().at("examples"), "The sun rose. Birds sang. =>Morning came.");
    EXPECT_NE(r.g.node(ctx).metadata.at("subprocess:summarize in one sentence").find("OPERATION:"), std::string::npos);
    auto in = r.g.make_symbol(std::string("The tide rises. Then it rises again."));
    EXPECT_EQ(r.text(expr(r.rt, in)), "Tides rise twice daily.");
}

TEST(DeriveSubprocess, MalformedSpecIsRejected) {
    Rig r(Script{{"bad goal", "OPERATION: Do it.\nEXAMPLE: no separator here"}});
    auto ctx = r.g.make_symbol(std::string("x"));
    EXPECT_THROW(derive_subprocess(r.rt, "bad goal", ctx), ConstraintViolation);
    EXPECT_THROW(parse_operator_spec("EXAMPLE: a =>b", "x"), ConstraintViolation);
    EXPECT_THROW(parse_operator_spec("OPERATION: a\nOPERATION: b", "x"), ConstraintViolation);
    EXPECT_THROW(parse_operator_spec("OPERATION: a\nchatter", "x"), ConstraintViolation);
    EXPECT_NO_THROW(parse_operator_spec("operation: lower case prefix", "x"));
}

TEST(Try, TranscriptMatchesGolden) {
    auto actual = fixtures::try_transcript();
    EXPECT_EQ(actual, fixtures::golden("try_fixture.json", actual));
}

TEST(Stream, TranscriptMatchesGolden) {
    auto actual = fixtures::stream_transcript();
    EXPECT_EQ(actual, fixtures::golden("stream_partition.json", actual));
}

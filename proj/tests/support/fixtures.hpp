#pragma once

// Shared fixtures for unit tests, the acceptance runner and benchmarks.

#include <map>
#include <string>
#include <vector>

#include "nesy/composition.hpp"
#include "nesy/engine.hpp"
#include "nesy/protocol/protocol.hpp"
#include "nesy/symbol.hpp"
#include "nesy/vertex/sample_set.hpp"
#include "oracles.hpp"

namespace fixtures {

nesy::vertex::SampleSet to_set(const oracle::Set& rows, nesy::vertex::Role role = nesy::vertex::Role::generated);

/// SQL-flavoured request with all seven segments populated.
nesy::EngineRequest fig3_request();

/// Six-node document graph: Report -> {Title, Abstract, Method -> Source, RelatedWork}.
/// Returns the root; `names` maps each label to its id.
nesy::NodeId report_graph(nesy::Graph& g, std::map<std::string, nesy::NodeId>& names);

/// Execute behaviour for single assignments of the form `name = int("literal")`.
/// Succeeds with "name = N" or fails with an ExecutionError.
nesy::Expression execute_behavior();
/// Scripted corrections for the Try fixture.
std::map<std::string, std::string> try_script();

/// Clean -> Translate -> Outline answers for the chain fixture.
std::map<std::string, std::string> chain_script();
inline const char* kChainInput = "<p>The  tide rises twice a day.</p>";

/// Three topics with two paraphrases each, ordered A1 B1 C1 A2 B2 C2.
std::vector<std::string> cluster_chunks();
std::map<std::string, std::string> cluster_label_script();

/// Four capabilities with distinct descriptions.
nesy::protocol::CapabilityRegistry scripted_capabilities();

/// Five-task expected plan with references on every task.
nesy::protocol::Plan five_task_plan();

/// Answers the protocol's requests for the five-task plan; selection replies
/// for the tasks listed in `bad_selections` are wrong.
nesy::FunctionCompletion::Fn protocol_engine(std::vector<std::string> bad_selections);

/// Canonical text outputs of the four pipeline fixtures, compared against
/// tests/golden by the unit tests and the acceptance runner.
std::string fig3_transcript();
/// Try on `a = int("3,")` with two retries: output, correction count and
/// the analysis sent with the one correction call.
std::string try_transcript();
/// A 160-word text split at budget 40 with no overlap.
std::string stream_transcript();
/// cluster_merge over cluster_chunks() at the default threshold.
std::string cluster_transcript();

/// Reads tests/golden/<name>. With NESY_UPDATE_GOLDEN set, writes `actual`
/// there first.
std::string golden(const std::string& name, const std::string& actual);

}  // namespace fixtures

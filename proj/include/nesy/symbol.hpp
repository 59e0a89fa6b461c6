#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nesy {

/// Opaque binary payload (image, audio). Only its placeholder is ever rendered.
struct Blob {
    std::string name;
    std::string bytes;

    bool operator==(const Blob&) const = default;
};

using Payload = std::variant<std::string, double, std::vector<std::string>, Blob>;

std::string_view payload_kind(const Payload& p);

/// Human-readable text form. Lists render Python-style, blobs as
/// "<blob:NAME:BYTECOUNT>".
std::string render(const Payload& p);

/// Literal form used inside operator statements: text is quoted, numbers
/// and lists are rendered as-is.
std::string literal(const Payload& p);

struct NodeId {
    std::uint64_t value = 0;

    auto operator<=>(const NodeId&) const = default;
    std::string str() const { return "n" + std::to_string(value); }
};

struct SymbolNode {
    NodeId id;
    Payload payload;
    std::optional<std::vector<double>> embedding;
    std::string static_context;
    std::string dynamic_context;
    std::optional<NodeId> parent;
    std::vector<NodeId> children;
    std::map<std::string, std::string> metadata;
    std::size_t step = 0;  // creation order within the graph
};

/// Named results of expression evaluation.
class Linker {
public:
    void add(const std::string& name, NodeId id) { entries_[name] = id; }
    NodeId find(const std::string& name) const;
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    const std::map<std::string, NodeId>& entries() const { return entries_; }

private:
    std::map<std::string, NodeId> entries_;
};

struct GraphExport {
    struct Node {
        NodeId id;
        std::string payload;
        std::size_t step;
    };
    std::vector<Node> nodes;                        // preorder
    std::vector<std::pair<NodeId, NodeId>> edges;   // (parent, child)

    nlohmann::json to_json() const;
};

/// Forest of symbol nodes. Each node has at most one parent; single writer.
class Graph {
public:
    NodeId make_symbol(Payload payload, std::string static_context = {});

    /// make_symbol + link_child in one step.
    NodeId derive(NodeId parent, Payload payload);

    void link_child(NodeId parent, NodeId child);
    NodeId root_of(NodeId id) const;

    const SymbolNode& node(NodeId id) const;
    bool contains(NodeId id) const { return id.value < nodes_.size(); }
    std::size_t size() const { return nodes_.size(); }

    void set_dynamic_context(NodeId id, std::string ctx);
    void set_metadata(NodeId id, const std::string& key, std::string value);
    void set_embedding(NodeId id, std::vector<double> v);

    void link_result(const std::string& name, NodeId id);
    const Linker& linker() const { return linker_; }

    GraphExport export_graph(NodeId root) const;

private:
    SymbolNode& mutable_node(NodeId id);

    std::vector<SymbolNode> nodes_;
    Linker linker_;
    std::optional<std::size_t> embedding_dim_;
};

}  // namespace nesy

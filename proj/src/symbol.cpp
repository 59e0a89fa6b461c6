#include "nesy/symbol.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nesy/errors.hpp"
#include "nesy/text.hpp"

namespace nesy {

std::string_view payload_kind(const Payload& p) {
    switch (p.index()) {
        case 0: return "text";
        case 1: return "number";
        case 2: return "list";
        default: return "blob";
    }
}

std::string render(const Payload& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return text::format_number(v);
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                return text::render_list(v);
            } else {
                return "<blob:" + v.name + ":" + std::to_string(v.bytes.size()) + ">";
            }
        },
        p);
}

std::string literal(const Payload& p) {
    if (const auto* s = std::get_if<std::string>(&p)) return text::quote(*s);
    return render(p);
}

NodeId Linker::find(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw LookupError("linker has no result named '" + name + "'");
    return it->second;
}

nlohmann::json GraphExport::to_json() const {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes) {
        j["nodes"].push_back({{"id", n.id.str()}, {"payload", n.payload}, {"step", n.step}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [p, c] : edges) j["edges"].push_back({p.str(), c.str()});
    return j;
}

NodeId Graph::make_symbol(Payload payload, std::string static_context) {
    if (const auto* d = std::get_if<double>(&payload); d && !std::isfinite(*d)) {
        throw ArgumentError("cannot render number payload: value is not finite");
    }
    if (const auto* b = std::get_if<Blob>(&payload); b && b->name.empty()) {
        throw ArgumentError("cannot render blob payload: blob has no name");
    }
    SymbolNode n;
    n.id = NodeId{nodes_.size()};
    n.step = nodes_.size();
    n.payload = std::move(payload);
    n.static_context = std::move(static_context);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

NodeId Graph::derive(NodeId parent, Payload payload) {
    (void)node(parent);
    auto id = make_symbol(std::move(payload));
    link_child(parent, id);
    return id;
}

void Graph::link_child(NodeId parent, NodeId child) {
    (void)node(parent);
    (void)node(child);
    if (parent == child || root_of(parent) == child) {
        throw GraphError("linking " + parent.str() + " -> " + child.str() + " would create a cycle");
    }
    auto& c = mutable_node(child);
    if (c.parent) {
        throw GraphError("node " + child.str() + " already has parent " + c.parent->str() +
                         "; cannot re-parent under " + parent.str());
    }
    c.parent = parent;
    mutable_node(parent).children.push_back(child);
}

NodeId Graph::root_of(NodeId id) const {
    const SymbolNode* n = &node(id);
    while (n->parent) n = &node(*n->parent);
    return n->id;
}

const SymbolNode& Graph::node(NodeId id) const {
    if (!contains(id)) throw LookupError("no node " + id.str() + " in graph");
    return nodes_[id.value];
}

SymbolNode& Graph::mutable_node(NodeId id) {
    if (!contains(id)) throw LookupError("no node " + id.str() + " in graph");
    return nodes_[id.value];
}

void Graph::set_dynamic_context(NodeId id, std::string ctx) { mutable_node(id).dynamic_context = std::move(ctx); }

void Graph::set_metadata(NodeId id, const std::string& key, std::string value) {
    mutable_node(id).metadata[key] = std::move(value);
}

void Graph::set_embedding(NodeId id, std::vector<double> v) {
    if (v.empty()) throw ArgumentError("embedding must not be empty");
    for (double x : v) {
        if (!std::isfinite(x)) throw ArgumentError("embedding has a non-finite entry");
    }
    if (embedding_dim_ && *embedding_dim_ != v.size()) {
        throw ArgumentError("embedding dimension " + std::to_string(v.size()) + " differs from graph dimension " +
                            std::to_string(*embedding_dim_));
    }
    embedding_dim_ = v.size();
    mutable_node(id).embedding = std::move(v);
}

void Graph::link_result(const std::string& name, NodeId id) {
    (void)node(id);
    linker_.add(name, id);
}

GraphExport Graph::export_graph(NodeId root) const {
    GraphExport out;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        const auto& n = node(id);
        out.nodes.push_back({id, render(n.payload), n.step});
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
        for (auto c : n.children) out.edges.emplace_back(id, c);
    }
    // edges follow node preorder: re-sort by the position of the parent
    std::map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) pos[out.nodes[i].id] = i;
    std::stable_sort(out.edges.begin(), out.edges.end(),
                     [&](const auto& a, const auto& b) { return pos[a.second] < pos[b.second]; });
    return out;
}

}  // namespace nesy

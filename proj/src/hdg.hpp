#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpus.hpp"

namespace hdgrag {

enum class NodeType : uint8_t { kPaper, kAuthor, kVenue, kInstitution, kTopic };
enum class EdgeType : uint8_t { kCites, kWrites, kPublishedIn, kAffiliatedWith, kHasTopic };
enum class LinkType : uint8_t { kCoCitation, kCoTopic, kCoVenue, kCoInstitution };

inline constexpr size_t kNodeTypeCount = 5;
inline constexpr size_t kEdgeTypeCount = 5;
inline constexpr size_t kLinkTypeCount = 4;

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);
std::string_view to_string(LinkType t);
NodeType parse_node_type(std::string_view s);
EdgeType parse_edge_type(std::string_view s);

/// Declared (source, destination) node types of an edge type.
std::pair<NodeType, NodeType> edge_signature(EdgeType t);

struct NodeRef {
    NodeType type;
    std::string key;
    auto operator<=>(const NodeRef&) const = default;
};

struct TypedEdge {
    EdgeType type;
    NodeRef src;
    NodeRef dst;
    auto operator<=>(const TypedEdge&) const = default;
};

/// Document-document relation. Symmetric types keep doc_a < doc_b;
/// co-citation runs from citer to cited.
struct DocLink {
    LinkType type;
    std::string doc_a;
    std::string doc_b;
    auto operator<=>(const DocLink&) const = default;
};

using LocalEdge = std::pair<uint32_t, uint32_t>;

/// Immutable typed graph. Node keys are kept sorted within each type and
/// edges sorted within each edge type, so the layout does not depend on the
/// order metadata arrived in. Nodes also have a global index: types are laid
/// out in enum order, keys in sorted order within a type.
class HeteroGraph {
  public:
    HeteroGraph() = default;
    /// Keys are deduplicated and sorted; edge endpoints must exist.
    HeteroGraph(
            std::array<std::vector<std::string>, kNodeTypeCount> nodes,
            const std::vector<TypedEdge>& edges);

    const std::vector<std::string>& keys(NodeType t) const {
        return nodes_[static_cast<size_t>(t)];
    }
    /// Local edges (src index in source type, dst index in destination type).
    const std::vector<LocalEdge>& edges(EdgeType t) const {
        return edges_[static_cast<size_t>(t)];
    }

    size_t node_count(NodeType t) const { return keys(t).size(); }
    size_t node_count() const;
    size_t edge_count() const;

    /// Local index of a key, or -1.
    int64_t find(NodeType t, std::string_view key) const;
    size_t type_offset(NodeType t) const { return offsets_[static_cast<size_t>(t)]; }
    size_t global_index(NodeType t, uint32_t local) const { return type_offset(t) + local; }
    NodeRef node_at(size_t global) const;

    std::vector<TypedEdge> typed_edges() const;

    size_t dropped_citations() const { return dropped_citations_; }
    void set_dropped_citations(size_t n) { dropped_citations_ = n; }

    /// Same node set, with only the given edges.
    HeteroGraph with_edges(const std::array<std::vector<LocalEdge>, kEdgeTypeCount>& edges) const;

  private:
    std::array<std::vector<std::string>, kNodeTypeCount> nodes_;
    std::array<std::vector<LocalEdge>, kEdgeTypeCount> edges_;
    std::array<size_t, kNodeTypeCount> offsets_{};
    size_t dropped_citations_ = 0;
};

/// One Paper node per document; metadata fan-out edges; cites edges only to
/// in-corpus targets (others counted in dropped_citations()).
HeteroGraph build_graph(const Corpus& corpus);

/// Sorted, duplicate-free projected links derived from base edges.
std::vector<DocLink> project_document_links(const HeteroGraph& graph);

struct GraphStats {
    std::array<size_t, kNodeTypeCount> nodes{};
    std::array<size_t, kEdgeTypeCount> edges{};
    size_t dropped_citations = 0;

    bool operator==(const GraphStats&) const = default;
    /// Node and edge counts only; dropped_citations is not recoverable from
    /// the exported lists.
    std::string to_kv() const;
};

GraphStats graph_stats(const HeteroGraph& graph);

// Text exports, sorted lexicographically for byte-stable output.
// Edges: "edge_type\tsrc_type:src_key\tdst_type:dst_key". Nodes: "type:key".
std::string format_edge_list(const HeteroGraph& graph);
std::string format_node_list(const HeteroGraph& graph);
std::string format_doc_links(const std::vector<DocLink>& links);
HeteroGraph parse_graph(std::string_view node_list, std::string_view edge_list);

} // namespace hdgrag

#include "hdg.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hdgrag {

namespace {

constexpr std::array<std::string_view, kNodeTypeCount> kNodeNames = {
        "Paper", "Author", "Venue", "Institution", "Topic"};
constexpr std::array<std::string_view, kEdgeTypeCount> kEdgeNames = {
        "cites", "writes", "published_in", "affiliated_with", "has_topic"};
constexpr std::array<std::string_view, kLinkTypeCount> kLinkNames = {
        "co_citation", "co_topic", "co_venue", "co_institution"};

size_t idx(NodeType t) { return static_cast<size_t>(t); }
size_t idx(EdgeType t) { return static_cast<size_t>(t); }

bool valid_key(std::string_view k) {
    return !k.empty() && k.find_first_of("\t\n\r") == std::string_view::npos;
}

} // namespace

std::string_view to_string(NodeType t) { return kNodeNames[idx(t)]; }
std::string_view to_string(EdgeType t) { return kEdgeNames[idx(t)]; }
std::string_view to_string(LinkType t) { return kLinkNames[static_cast<size_t>(t)]; }

NodeType parse_node_type(std::string_view s) {
    for (size_t i = 0; i < kNodeTypeCount; ++i) {
        if (kNodeNames[i] == s) {
            return static_cast<NodeType>(i);
        }
    }
    fail(ErrorCode::kFormat, "unknown node type '" + std::string(s) + "'");
}

EdgeType parse_edge_type(std::string_view s) {
    for (size_t i = 0; i < kEdgeTypeCount; ++i) {
        if (kEdgeNames[i] == s) {
            return static_cast<EdgeType>(i);
        }
    }
    fail(ErrorCode::kFormat, "unknown edge type '" + std::string(s) + "'");
}

std::pair<NodeType, NodeType> edge_signature(EdgeType t) {
    switch (t) {
        case EdgeType::kCites:
            return {NodeType::kPaper, NodeType::kPaper};
        case EdgeType::kWrites:
            return {NodeType::kPaper, NodeType::kAuthor};
        case EdgeType::kPublishedIn:
            return {NodeType::kPaper, NodeType::kVenue};
        case EdgeType::kAffiliatedWith:
            return {NodeType::kPaper, NodeType::kInstitution};
        case EdgeType::kHasTopic:
            return {NodeType::kPaper, NodeType::kTopic};
    }
    fail(ErrorCode::kInvalidArgument, "bad edge type");
}

HeteroGraph::HeteroGraph(
        std::array<std::vector<std::string>, kNodeTypeCount> nodes,
        const std::vector<TypedEdge>& edges)
        : nodes_(std::move(nodes)) {
    size_t offset = 0;
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        auto& keys = nodes_[t];
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (const auto& k : keys) {
            HDGRAG_REQUIRE(
                    valid_key(k), ErrorCode::kInvalidArgument, "invalid node key '" + k + "'");
        }
        offsets_[t] = offset;
        offset += keys.size();
    }
    for (const auto& e : edges) {
        const auto [st, dt] = edge_signature(e.type);
        HDGRAG_REQUIRE(
                e.src.type == st && e.dst.type == dt,
                ErrorCode::kInvalidArgument,
                "edge endpoints do not match signature of " + std::string(to_string(e.type)));
        const int64_t s = find(st, e.src.key);
        const int64_t d = find(dt, e.dst.key);
        HDGRAG_REQUIRE(
                s >= 0 && d >= 0,
                ErrorCode::kNotFound,
                "dangling edge " + e.src.key + " -> " + e.dst.key);
        HDGRAG_REQUIRE(
                !(e.type == EdgeType::kCites && s == d),
                ErrorCode::kInvalidArgument,
                "self citation on " + e.src.key);
        edges_[idx(e.type)].emplace_back(uint32_t(s), uint32_t(d));
    }
    for (auto& list : edges_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

size_t HeteroGraph::node_count() const {
    size_t n = 0;
    for (const auto& k : nodes_) {
        n += k.size();
    }
    return n;
}

size_t HeteroGraph::edge_count() const {
    size_t n = 0;
    for (const auto& e : edges_) {
        n += e.size();
    }
    return n;
}

int64_t HeteroGraph::find(NodeType t, std::string_view key) const {
    const auto& keys = nodes_[idx(t)];
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) {
        return -1;
    }
    return it - keys.begin();
}

NodeRef HeteroGraph::node_at(size_t global) const {
    for (size_t t = kNodeTypeCount; t-- > 0;) {
        if (global >= offsets_[t] && global - offsets_[t] < nodes_[t].size()) {
            return {static_cast<NodeType>(t), nodes_[t][global - offsets_[t]]};
        }
    }
    fail(ErrorCode::kNotFound, "node index out of range");
}

std::vector<TypedEdge> HeteroGraph::typed_edges() const {
    std::vector<TypedEdge> out;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        const auto type = static_cast<EdgeType>(e);
        const auto [st, dt] = edge_signature(type);
        for (const auto& [s, d] : edges_[e]) {
            out.push_back({type, {st, nodes_[idx(st)][s]}, {dt, nodes_[idx(dt)][d]}});
        }
    }
    return out;
}

HeteroGraph HeteroGraph::with_edges(
        const std::array<std::vector<LocalEdge>, kEdgeTypeCount>& edges) const {
    HeteroGraph g = *this;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        const auto [st, dt] = edge_signature(static_cast<EdgeType>(e));
        for (const auto& [s, d] : edges[e]) {
            HDGRAG_REQUIRE(
                    s < node_count(st) && d < node_count(dt),
                    ErrorCode::kNotFound,
                    "edge endpoint out of range");
        }
        g.edges_[e] = edges[e];
        std::sort(g.edges_[e].begin(), g.edges_[e].end());
        g.edges_[e].erase(std::unique(g.edges_[e].begin(), g.edges_[e].end()), g.edges_[e].end());
    }
    return g;
}

HeteroGraph build_graph(const Corpus& corpus) {
    HDGRAG_REQUIRE(!corpus.empty(), ErrorCode::kInvalidArgument, "cannot build graph: empty corpus");
    std::array<std::vector<std::string>, kNodeTypeCount> nodes;
    std::vector<TypedEdge> edges;
    size_t dropped = 0;
    auto add = [&](EdgeType et, const std::string& src, NodeType dt, const std::string& dst) {
        nodes[idx(dt)].push_back(dst);
        edges.push_back({et, {NodeType::kPaper, src}, {dt, dst}});
    };
    for (const auto& d : corpus.documents()) {
        nodes[idx(NodeType::kPaper)].push_back(d.doc_id);
        for (const auto& a : d.authors) {
            add(EdgeType::kWrites, d.doc_id, NodeType::kAuthor, a);
        }
        if (d.venue) {
            add(EdgeType::kPublishedIn, d.doc_id, NodeType::kVenue, *d.venue);
        }
        for (const auto& i : d.institutions) {
            add(EdgeType::kAffiliatedWith, d.doc_id, NodeType::kInstitution, i);
        }
        for (const auto& t : d.topics) {
            add(EdgeType::kHasTopic, d.doc_id, NodeType::kTopic, t);
        }
        for (const auto& c : d.cited_ids) {
            if (corpus.contains(c)) {
                edges.push_back({EdgeType::kCites, {NodeType::kPaper, d.doc_id}, {NodeType::kPaper, c}});
            } else {
                ++dropped;
            }
        }
    }
    HeteroGraph g(std::move(nodes), edges);
    g.set_dropped_citations(dropped);
    return g;
}

std::vector<DocLink> project_document_links(const HeteroGraph& graph) {
    const auto& papers = graph.keys(NodeType::kPaper);
    std::set<DocLink> links;
    for (const auto& [s, d] : graph.edges(EdgeType::kCites)) {
        links.insert({LinkType::kCoCitation, papers[s], papers[d]});
    }
    // Papers sharing an attribute node form a symmetric clique.
    auto cliques = [&](EdgeType et, LinkType lt, NodeType attr) {
        std::vector<std::vector<uint32_t>> members(graph.node_count(attr));
        for (const auto& [p, a] : graph.edges(et)) {
            members[a].push_back(p);
        }
        for (const auto& group : members) {
            for (size_t i = 0; i < group.size(); ++i) {
                for (size_t j = i + 1; j < group.size(); ++j) {
                    const auto& a = papers[group[i]];
                    const auto& b = papers[group[j]];
                    links.insert(a < b ? DocLink{lt, a, b} : DocLink{lt, b, a});
                }
            }
        }
    };
    cliques(EdgeType::kHasTopic, LinkType::kCoTopic, NodeType::kTopic);
    cliques(EdgeType::kPublishedIn, LinkType::kCoVenue, NodeType::kVenue);
    cliques(EdgeType::kAffiliatedWith, LinkType::kCoInstitution, NodeType::kInstitution);
    return {links.begin(), links.end()};
}

GraphStats graph_stats(const HeteroGraph& graph) {
    GraphStats s;
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        s.nodes[t] = graph.node_count(static_cast<NodeType>(t));
    }
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        s.edges[e] = graph.edges(static_cast<EdgeType>(e)).size();
    }
    s.dropped_citations = graph.dropped_citations();
    return s;
}

std::string GraphStats::to_kv() const {
    std::ostringstream out;
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        out << "nodes." << kNodeNames[t] << '=' << nodes[t] << '\n';
    }
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        out << "edges." << kEdgeNames[e] << '=' << edges[e] << '\n';
    }
    return out.str();
}

namespace {

std::string node_label(const NodeRef& n) {
    return std::string(to_string(n.type)) + ":" + n.key;
}

std::string sorted_lines(std::vector<std::string> lines) {
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

NodeRef parse_label(std::string_view label) {
    const auto colon = label.find(':');
    HDGRAG_REQUIRE(
            colon != std::string_view::npos,
            ErrorCode::kFormat,
            "node label without type: " + std::string(label));
    return {parse_node_type(label.substr(0, colon)), std::string(label.substr(colon + 1))};
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        if (end > pos) {
            out.push_back(text.substr(pos, end - pos));
        }
        pos = end + 1;
    }
    return out;
}

} // namespace

std::string format_edge_list(const HeteroGraph& graph) {
    std::vector<std::string> lines;
    for (const auto& e : graph.typed_edges()) {
        lines.push_back(
                std::string(to_string(e.type)) + "\t" + node_label(e.src) + "\t" + node_label(e.dst));
    }
    return sorted_lines(std::move(lines));
}

std::string format_node_list(const HeteroGraph& graph) {
    std::vector<std::string> lines;
    for (size_t i = 0; i < graph.node_count(); ++i) {
        lines.push_back(node_label(graph.node_at(i)));
    }
    return sorted_lines(std::move(lines));
}

std::string format_doc_links(const std::vector<DocLink>& links) {
    std::vector<std::string> lines;
    for (const auto& l : links) {
        lines.push_back(std::string(to_string(l.type)) + "\t" + l.doc_a + "\t" + l.doc_b);
    }
    return sorted_lines(std::move(lines));
}

HeteroGraph parse_graph(std::string_view node_list, std::string_view edge_list) {
    std::array<std::vector<std::string>, kNodeTypeCount> nodes;
    for (auto line : lines_of(node_list)) {
        auto n = parse_label(line);
        nodes[idx(n.type)].push_back(std::move(n.key));
    }
    std::vector<TypedEdge> edges;
    for (auto line : lines_of(edge_list)) {
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        HDGRAG_REQUIRE(
                t2 != std::string_view::npos,
                ErrorCode::kFormat,
                "edge line needs three tab-separated fields: " + std::string(line));
        edges.push_back(
                {parse_edge_type(line.substr(0, t1)),
                 parse_label(line.substr(t1 + 1, t2 - t1 - 1)),
                 parse_label(line.substr(t2 + 1))});
    }
    return HeteroGraph(std::move(nodes), edges);
}

} // namespace hdgrag

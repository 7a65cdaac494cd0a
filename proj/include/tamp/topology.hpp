#pragma once

#include "tamp/number.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tamp {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class NodeKind { Compute, Router };

struct Node {
    std::string name;
    NodeKind kind = NodeKind::Router;
};

struct Edge {
    NodeId from = 0;
    NodeId to = 0;
    Bandwidth bw;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Topology {
public:
    NodeId add_node(std::string name, NodeKind kind);
    EdgeId add_edge(NodeId from, NodeId to, Bandwidth bw);
    // Adds (u,v) and (v,u) with the same bandwidth.
    void add_link(NodeId u, NodeId v, Bandwidth bw);
    void set_symmetric(bool s) { symmetric_ = s; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Node& node(NodeId v) const { return nodes_.at(v); }
    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    const std::string& name(NodeId v) const { return nodes_.at(v).name; }
    bool is_compute(NodeId v) const { return nodes_.at(v).kind == NodeKind::Compute; }
    std::vector<NodeId> compute_nodes() const;

    std::optional<NodeId> find_node(const std::string& name) const;
    NodeId node_by_name(const std::string& name) const;
    std::optional<EdgeId> find_edge(NodeId from, NodeId to) const;
    EdgeId edge_between(NodeId from, NodeId to) const;
    const Bandwidth& bandwidth(NodeId from, NodeId to) const { return edges_[edge_between(from, to)].bw; }

    bool symmetric() const { return symmetric_; }
    // True iff every edge has an equal-bandwidth reverse edge.
    bool check_symmetric() const;
    // Sorted neighbour list over the undirected skeleton.
    std::vector<NodeId> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return neighbors(v).size(); }
    bool skeleton_is_tree() const;
    bool compute_nodes_connected() const;

    Topology with_bandwidths_scaled(const Rational& c) const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::map<std::pair<NodeId, NodeId>, EdgeId> index_;
    std::map<std::string, NodeId> by_name_;
    bool symmetric_ = false;
};

// Center "o" (id 0), leaves "v1".."vp" (ids 1..p).
Topology build_star(const std::vector<std::pair<Bandwidth, Bandwidth>>& up_down);
Topology build_symmetric_star(const std::vector<Bandwidth>& w);

struct NormalizeReport {
    std::vector<std::string> fused;     // degree-2 routers removed
    std::vector<std::string> leafed;    // internal compute nodes turned into routers
    std::vector<std::string> pruned;    // router leaves removed
    std::map<std::string, std::string> alias;  // old compute name -> compute name after normalization
};

Topology normalize_tree(const Topology& t, NormalizeReport* report = nullptr);
bool is_normalized_tree(const Topology& t);

struct EdgeCut {
    EdgeId edge = 0;
    std::vector<NodeId> minus;  // compute nodes on the tail side
    std::vector<NodeId> plus;
};

EdgeCut edge_cut(const Topology& t, EdgeId e);

// Rooted view of a tree skeleton used for paths, cuts and multicast unions.
class TreeIndex {
public:
    explicit TreeIndex(const Topology& t, NodeId root = 0);

    const Topology& topology() const { return *t_; }
    NodeId root() const { return root_; }
    std::optional<NodeId> parent(NodeId v) const;
    std::size_t depth(NodeId v) const { return depth_[v]; }
    const std::vector<NodeId>& children(NodeId v) const { return children_[v]; }
    const std::vector<NodeId>& preorder() const { return order_; }
    bool in_subtree(NodeId v, NodeId top) const { return tin_[top] <= tin_[v] && tout_[v] <= tout_[top]; }

    // Directed edges along the unique path u -> v.
    std::vector<EdgeId> path(NodeId u, NodeId v) const;
    // Union of path edges from src to every destination, each edge once, id-sorted.
    std::vector<EdgeId> multicast(NodeId src, const std::vector<NodeId>& dests) const;

    // For an edge between a and b, the endpoint that is the child in this rooting.
    NodeId lower_endpoint(EdgeId e) const;
    // Sum of per-node values over the tail side and head side of e.
    std::pair<Rational, Rational> side_sums(EdgeId e, const std::vector<Rational>& per_node) const;
    std::vector<Rational> subtree_sums(const std::vector<Rational>& per_node) const;

private:
    const Topology* t_;
    NodeId root_;
    std::vector<NodeId> parent_;
    std::vector<std::size_t> depth_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> order_;
    std::vector<std::size_t> tin_, tout_;
    std::vector<EdgeId> up_, down_;
};

// Undirected skeleton edges {u,v} with u < v.
std::vector<std::pair<NodeId, NodeId>> skeleton_edges(const Topology& t);

struct OrientedTree {
    std::vector<std::optional<NodeId>> parent;
    std::vector<std::vector<NodeId>> children;  // id-sorted
    NodeId root = 0;

    bool is_leaf(NodeId v) const { return children[v].empty(); }
    std::vector<NodeId> postorder() const;
    std::vector<NodeId> preorder() const;
    std::vector<NodeId> leaves_under(NodeId v) const;
};

// sizes indexed by node id (routers 0).
OrientedTree orient(const Topology& t, const std::vector<Rational>& sizes);

using Cover = std::vector<NodeId>;
bool is_cover(const OrientedTree& ot, const Cover& c);
std::vector<Cover> enumerate_minimal_covers(const OrientedTree& ot, std::size_t guard = 24);

std::vector<EdgeId> unique_path(const Topology& t, NodeId u, NodeId v);

}  // namespace tamp

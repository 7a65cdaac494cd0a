#pragma once

#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <utility>
#include <vector>

namespace tamp {

using UEdge = std::pair<NodeId, NodeId>;  // undirected skeleton edge, first < second

struct EdgeClasses {
    std::vector<UEdge> alpha, beta;
    bool is_alpha(NodeId u, NodeId v) const;
    bool is_beta(NodeId u, NodeId v) const;
};

// Relations are exchanged when |R| > |S|, so "R" below is the smaller side.
EdgeClasses classify_edges(const Topology& t, const Distribution& d);

struct Partition {
    std::vector<std::vector<NodeId>> blocks;      // compute nodes, id-sorted
    std::vector<std::vector<UEdge>> spanning;     // Steiner tree edges per block
    std::size_t visits = 0;                       // priority-queue pops
};

Partition balanced_partition(const Topology& t, const Distribution& d);
// Checks the four balanced-partition properties and that blocks partition V_C.
Verdict check_balanced_partition(const Topology& t, const Distribution& d, const Partition& p);

struct IntersectRun {
    TrafficTrace trace;
    NodeState state;
    Partition partition;
};

IntersectRun star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed);
IntersectRun tree_intersect(const Topology& t, const Distribution& d, std::uint64_t seed);

// Edges of the union of tree paths between the given compute nodes.
std::vector<UEdge> steiner_edges(const TreeIndex& idx, const std::vector<NodeId>& nodes);

}  // namespace tamp

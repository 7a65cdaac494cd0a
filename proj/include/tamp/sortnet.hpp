#pragma once

#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tamp {

// Compute nodes in depth-first order from root, children visited by id.
std::vector<NodeId> valid_ordering(const Topology& t, NodeId root);

// Splits n elements across k targets in proportion to weights (all positive).
std::vector<std::size_t> proportional(const std::vector<Rational>& weights, std::size_t n);

struct SortPlan {
    std::vector<NodeId> heavy;            // v_1..v_k, left to right
    std::vector<NodeId> light;
    double rho = 0;
    std::size_t samples = 0;              // s
    std::vector<Key> quantiles;           // t_i
    std::vector<std::size_t> interval_counts;    // c_j
    std::vector<std::size_t> post_round1_sizes;  // M_j
    std::vector<std::optional<Key>> splitters;   // b_0..b_k; nullopt at both ends
};

struct SortRun {
    TrafficTrace trace;
    NodeState state;
    SortPlan plan;
    std::vector<NodeId> order;  // nodes whose outputs concatenate to the sorted input
    std::string strategy;
};

// Sorting uses the R relation only.
SortRun wts_sort(const Topology& t, const Distribution& d, std::uint64_t seed);
SortRun terasort(const Topology& t, const Distribution& d, std::uint64_t seed);
SortRun send_all_to_max(const Topology& t, const Distribution& d);

}  // namespace tamp

#pragma once

#include "tamp/number.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tamp {

enum class BoundKind {
    IntersectTree,
    CartesianCut,
    CartesianCover,
    Sorting,
    JoinStar,
    CpUnequal,
    AsymSendingFree,
    AsymReceivingFree,
    AsymGeneral,
};

std::string to_string(BoundKind k);

struct BoundReport {
    BoundKind kind = BoundKind::IntersectTree;
    Magnitude value;
    bool applicable = true;            // false: precondition failed, value is 0
    std::optional<EdgeId> edge;        // maximizing edge
    std::vector<NodeId> nodes;         // cover, V_alpha, or maximizing node
    std::vector<NodeId> nodes2;        // V_beta
    std::string witness;
    std::string note;
};

enum class AsymVariant { SendingFree, ReceivingFree, General };

BoundReport lb_intersect_tree(const Topology& t, const Distribution& d);
BoundReport lb_cartesian_cut(const Topology& t, const Distribution& d);
// Without a cover: max over every minimal cover other than {root}.
BoundReport lb_cartesian_cover(const Topology& t, const Distribution& d, const std::optional<Cover>& cover = std::nullopt);
BoundReport lb_sorting(const Topology& t, const Distribution& d);
BoundReport lb_join_star(const Topology& t, const Distribution& d);
BoundReport lb_cp_unequal(const Topology& t, const Distribution& d);
BoundReport lb_asym_star(const Topology& t, const Distribution& d, AsymVariant variant);
// Same value by enumerating every admissible (V_alpha, V_beta); |V_C| <= 12.
BoundReport lb_asym_star_exhaustive(const Topology& t, const Distribution& d, AsymVariant variant);

// Minimal C with sum_v min{C w_v, r} C w_v >= r s, bracketed to relative
// precision 2^-30; lo is infeasible or exact, hi is feasible.
struct BalanceRoot {
    Rational lo{0}, hi{0};
    bool exact = false;
};
BalanceRoot balance_root(const Rational& r, const Rational& s, const std::vector<Bandwidth>& w);
Rational balance_lhs(const Rational& c, const Rational& r, const std::vector<Bandwidth>& w);

// w_v of a G-dagger node: bandwidth of its outgoing edge.
Bandwidth out_bandwidth(const Topology& t, const OrientedTree& ot, NodeId v);

}  // namespace tamp

#pragma once

#include "tamp/number.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tamp {

// Half-open grid region [row, row+height) x [col, col+width); rows index R, columns S.
struct Placement {
    NodeId node = 0;
    std::int64_t row = 0, col = 0, height = 0, width = 0;
};

// Node v's R tuples occupy rows [r_begin[v], r_begin[v] + |R_v|); likewise S.
struct GridLabeling {
    std::vector<std::size_t> r_begin, s_begin;
    explicit GridLabeling(const Distribution& d);
};

struct SquarePlan {
    std::vector<Placement> regions;
    std::int64_t rows = 0, cols = 0;  // target grid
    Magnitude scale;                  // L (or the L used in the unequal case)
};

struct PackedSquare {
    std::size_t item = 0;  // index into the input sides
    std::int64_t row = 0, col = 0, side = 0;
};

struct Packing {
    std::vector<PackedSquare> squares;
    std::int64_t covered = 0;  // side of the fully covered top-left square
};

// Decreasing sizes along the Z-order curve inside the smallest power-of-two container.
Packing pack_squares(const std::vector<std::int64_t>& sides);

// True iff the regions cover every cell of the rows x cols grid.
bool covers_grid(const std::vector<Placement>& regions, std::int64_t rows, std::int64_t cols);
// Total overlap area among regions clipped to the grid is zero.
bool disjoint(const std::vector<Placement>& regions);

SquarePlan whc_plan(const Topology& t, const Distribution& d);

struct CartesianRun {
    TrafficTrace trace;
    NodeState state;
    SquarePlan plan;
    std::string strategy;
};

CartesianRun whc_execute(const Topology& t, const Distribution& d, const SquarePlan& plan);
CartesianRun star_cartesian(const Topology& t, const Distribution& d);

// Squared quantity with an infinity sentinel.
struct Square {
    Rational value{0};
    bool inf = false;
};

struct TreeWeights {
    OrientedTree ot;
    std::vector<Square> w2;       // effective weight squared, per node
    std::vector<Rational> l2;     // fraction squared, per node
    std::vector<std::int64_t> d;  // square side per compute leaf (0 elsewhere)
};

TreeWeights tree_weights(const Topology& t, const Distribution& d);

struct TreeBlock {
    std::int64_t side = 0;
    std::vector<PackedSquare> leaves;  // item = leaf node id; offsets relative to the block
};

struct TreePacking {
    std::vector<std::vector<TreeBlock>> at;  // merged multiset per tree node
    TreeBlock top;                           // largest square at the root
    SquarePlan plan;
};

TreePacking tree_pack(const TreeWeights& w, const Distribution& d);
CartesianRun tree_cartesian(const Topology& t, const Distribution& d);

struct UnequalPlan {
    SquarePlan plan;
    Rational l_star{0};   // Eq. (1) minimizer (feasible end)
    Rational l_used{0};   // after inflation
    int inflations = 0;
};

// Plan on a rows x cols grid for the listed nodes.
UnequalPlan unequal_plan(std::int64_t rows, std::int64_t cols, const std::vector<NodeId>& nodes,
                         const std::vector<Bandwidth>& w);
CartesianRun whc_unequal(const Topology& t, const Distribution& d);
CartesianRun generalized_star_cartesian(const Topology& t, const Distribution& d);

// Multicast every row tuple to the regions spanning its row, and every column tuple likewise.
void execute_grid(Simulation& sim, const std::vector<Placement>& regions, Relation row_rel,
                  const std::vector<Index>& rows, Relation col_rel, const std::vector<Index>& cols,
                  std::optional<NodeId> relay = std::nullopt);

// For each row (or column) position, the nodes whose regions span it.
std::vector<std::vector<NodeId>> grid_spans(const std::vector<Placement>& regions, bool by_row, std::size_t count);

}  // namespace tamp

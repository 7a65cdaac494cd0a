#include "tamp/cartesian.hpp"

#include "tamp/bounds.hpp"
#include "tamp/sortnet.hpp"
#include "tamp/star.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tamp {

namespace {

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

std::int64_t to_i64(const Integer& x) {
    if (x > std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("square side overflows");
    return x.convert_to<std::int64_t>();
}

std::int64_t ceil_i64(const Rational& x) { return to_i64(ceil(x)); }

// Z-order position inside an aligned block: TL, TR, BL, BR at every level.
std::pair<std::int64_t, std::int64_t> z_decode(std::uint64_t p) {
    std::int64_t row = 0, col = 0;
    for (int k = 0; k < 32; ++k) {
        col |= static_cast<std::int64_t>((p >> (2 * k)) & 1) << k;
        row |= static_cast<std::int64_t>((p >> (2 * k + 1)) & 1) << k;
    }
    return {row, col};
}

std::vector<Index> all_of(std::size_t n) {
    std::vector<Index> out(n);
    std::iota(out.begin(), out.end(), Index{0});
    return out;
}

std::int64_t i64(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

// Per-position destination lists along one axis.
std::vector<std::vector<NodeId>> grid_spans(const std::vector<Placement>& regions, bool by_row, std::size_t count) {
    std::vector<std::vector<NodeId>> out(count);
    for (const auto& p : regions) {
        std::int64_t lo = by_row ? p.row : p.col;
        std::int64_t len = by_row ? p.height : p.width;
        std::int64_t hi = std::min(lo + len, i64(count));
        for (std::int64_t i = std::max<std::int64_t>(lo, 0); i < hi; ++i) out[i].push_back(p.node);
    }
    return out;
}

GridLabeling::GridLabeling(const Distribution& d) {
    Labeling lab(d);
    r_begin.assign(lab.r_offset.begin(), lab.r_offset.end() - 1);
    s_begin.assign(lab.s_offset.begin(), lab.s_offset.end() - 1);
}

Packing pack_squares(const std::vector<std::int64_t>& sides) {
    Packing out;
    if (sides.empty()) return out;
    std::vector<std::size_t> ord(sides.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return sides[a] > sides[b]; });
    unsigned __int128 area = 0;
    for (auto s : sides) {
        if (s <= 0 || !is_pow2(Integer(s))) throw std::invalid_argument("square sides must be powers of two");
        area += static_cast<unsigned __int128>(s) * static_cast<unsigned __int128>(s);
    }
    std::uint64_t pos = 0;
    for (auto i : ord) {
        auto [r, c] = z_decode(pos);
        out.squares.push_back({i, r, c, sides[i]});
        pos += static_cast<std::uint64_t>(sides[i]) * static_cast<std::uint64_t>(sides[i]);
    }
    std::int64_t c = 1;
    while (static_cast<unsigned __int128>(2 * c) * static_cast<unsigned __int128>(2 * c) <= area) c *= 2;
    out.covered = c;
    return out;
}

bool covers_grid(const std::vector<Placement>& regions, std::int64_t rows, std::int64_t cols) {
    if (rows <= 0 || cols <= 0) return true;
    std::vector<std::int64_t> cuts{0, rows};
    for (const auto& p : regions) {
        cuts.push_back(std::clamp<std::int64_t>(p.row, 0, rows));
        cuts.push_back(std::clamp<std::int64_t>(p.row + p.height, 0, rows));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
        std::int64_t r = cuts[b];
        std::vector<std::pair<std::int64_t, std::int64_t>> iv;
        for (const auto& p : regions)
            if (p.row <= r && r < p.row + p.height) iv.emplace_back(p.col, p.col + p.width);
        std::sort(iv.begin(), iv.end());
        std::int64_t reach = 0;
        for (const auto& [a, e] : iv) {
            if (a > reach) break;
            reach = std::max(reach, e);
        }
        if (reach < cols) return false;
    }
    return true;
}

bool disjoint(const std::vector<Placement>& regions) {
    for (std::size_t i = 0; i < regions.size(); ++i)
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            const auto& a = regions[i];
            const auto& b = regions[j];
            bool rows = a.row < b.row + b.height && b.row < a.row + a.height;
            bool cols = a.col < b.col + b.width && b.col < a.col + a.width;
            if (rows && cols) return false;
        }
    return true;
}

void execute_grid(Simulation& sim, const std::vector<Placement>& regions, Relation row_rel,
                  const std::vector<Index>& rows, Relation col_rel, const std::vector<Index>& cols,
                  std::optional<NodeId> relay) {
    const auto& lab = sim.labels();
    std::vector<Placement> live;
    for (const auto& p : regions)
        if (p.row < i64(rows.size()) && p.col < i64(cols.size())) live.push_back(p);
    Batch b;
    auto rs = grid_spans(live, true, rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        b.add(relay ? *relay : lab.owner(row_rel)[rows[i]], rs[i], row_rel, rows[i]);
    auto cs = grid_spans(live, false, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        b.add(relay ? *relay : lab.owner(col_rel)[cols[j]], cs[j], col_rel, cols[j]);
    b.flush(sim);
}

SquarePlan whc_plan(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    if (d.r_total() != d.s_total()) throw std::invalid_argument("wHC needs |R| = |S|");
    SquarePlan plan;
    plan.rows = i64(d.r_total());
    plan.cols = i64(d.s_total());
    Rational n = sz(d.total()), sum = 0;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        const Bandwidth& w = sv.w(v);
        if (w.is_infinite()) {
            std::int64_t side = to_i64(pow2_ceil(std::max<Rational>(sz(d.r_total()), 1)));
            plan.regions.push_back({sv.nodes[v], 0, 0, side, side});
            plan.scale = Magnitude::of(0);
            return plan;
        }
        sum += w.value() * w.value();
    }
    plan.scale = Magnitude::sqrt_of(n * n / sum);
    std::vector<std::int64_t> sides;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        Rational w2 = sv.w(v).value() * sv.w(v).value();
        sides.push_back(to_i64(pow2_ceil_sqrt(w2 * n * n / sum)));
    }
    for (const auto& sq : pack_squares(sides).squares)
        plan.regions.push_back({sv.nodes[sq.item], sq.row, sq.col, sq.side, sq.side});
    return plan;
}

CartesianRun whc_execute(const Topology& t, const Distribution& d, const SquarePlan& plan) {
    Simulation sim(t, d);
    sim.begin_round();
    execute_grid(sim, plan.regions, Relation::R, all_of(d.r_total()), Relation::S, all_of(d.s_total()));
    CartesianRun run;
    std::tie(run.trace, run.state) = sim.take();
    run.plan = plan;
    run.strategy = "whc";
    return run;
}

namespace {

CartesianRun converge_run(const Topology& t, const Distribution& d, NodeId target, std::string name) {
    Simulation sim(t, d);
    sim.begin_round();
    converge(sim, target);
    CartesianRun run;
    std::tie(run.trace, run.state) = sim.take();
    run.strategy = std::move(name);
    return run;
}

NodeId argmax_n(const Topology& t, const Distribution& d) {
    NodeId best = 0;
    bool first = true;
    for (NodeId v : t.compute_nodes())
        if (first || d.n(v) > d.n(best)) {
            best = v;
            first = false;
        }
    return best;
}

}  // namespace

CartesianRun star_cartesian(const Topology& t, const Distribution& d) {
    star_view(t, d);
    NodeId u = argmax_n(t, d);
    if (2 * d.n(u) > d.total()) return converge_run(t, d, u, "converge");
    return whc_execute(t, d, whc_plan(t, d));
}

namespace {

Square sq_add(const Square& a, const Square& b) {
    if (a.inf || b.inf) return {0, true};
    return {a.value + b.value, false};
}

Square sq_min(const Square& a, const Square& b) {
    if (a.inf) return b;
    if (b.inf) return a;
    return a.value <= b.value ? a : b;
}

Square sq_of(const Bandwidth& w) {
    if (w.is_infinite()) return {0, true};
    return {w.value() * w.value(), false};
}

}  // namespace

TreeWeights tree_weights(const Topology& t, const Distribution& d) {
    TreeWeights tw;
    tw.ot = orient(t, d.sizes());
    const auto& ot = tw.ot;
    if (t.is_compute(ot.root)) throw std::invalid_argument("G-dagger is rooted at a compute node");
    std::size_t n = t.node_count();
    tw.w2.assign(n, Square{});
    tw.l2.assign(n, 0);
    tw.d.assign(n, 0);
    for (NodeId v : ot.postorder()) {
        if (t.is_compute(v) && !ot.is_leaf(v)) throw std::invalid_argument("compute node is not a leaf");
        if (ot.is_leaf(v)) {
            tw.w2[v] = t.is_compute(v) ? sq_of(out_bandwidth(t, ot, v)) : Square{};
            continue;
        }
        Square sum;
        for (NodeId u : ot.children[v]) sum = sq_add(sum, tw.w2[u]);
        tw.w2[v] = v == ot.root ? sum : sq_min(sq_of(out_bandwidth(t, ot, v)), sum);
    }
    tw.l2[ot.root] = 1;
    Rational n_total = sz(d.total());
    for (NodeId v : ot.preorder()) {
        if (ot.is_leaf(v)) {
            if (t.is_compute(v)) tw.d[v] = to_i64(pow2_ceil_sqrt(n_total * n_total * tw.l2[v]));
            continue;
        }
        Square sum;
        std::size_t infs = 0;
        for (NodeId u : ot.children[v]) {
            sum = sq_add(sum, tw.w2[u]);
            infs += tw.w2[u].inf;
        }
        for (NodeId u : ot.children[v]) {
            if (sum.inf) tw.l2[u] = tw.w2[u].inf ? Rational(tw.l2[v] / sz(infs)) : Rational(0);
            else if (sum.value == 0) tw.l2[u] = 0;
            else tw.l2[u] = tw.l2[v] * tw.w2[u].value / sum.value;
        }
    }
    return tw;
}

namespace {

TreeBlock combine(std::vector<TreeBlock> four) {
    TreeBlock out;
    std::int64_t s = four[0].side;
    out.side = 2 * s;
    const std::int64_t dr[4] = {0, 0, s, s}, dc[4] = {0, s, 0, s};
    for (int q = 0; q < 4; ++q)
        for (auto leaf : four[q].leaves) {
            leaf.row += dr[q];
            leaf.col += dc[q];
            out.leaves.push_back(leaf);
        }
    return out;
}

NodeId first_leaf(const TreeBlock& b) { return b.leaves.empty() ? 0 : static_cast<NodeId>(b.leaves.front().item); }

std::vector<TreeBlock> merge_blocks(std::vector<TreeBlock> blocks) {
    std::map<std::int64_t, std::vector<TreeBlock>> by_side;
    for (auto& b : blocks) by_side[b.side].push_back(std::move(b));
    std::vector<TreeBlock> out;
    while (!by_side.empty()) {
        auto it = by_side.begin();
        std::int64_t side = it->first;
        auto group = std::move(it->second);
        by_side.erase(it);
        std::stable_sort(group.begin(), group.end(),
                         [](const TreeBlock& a, const TreeBlock& b) { return first_leaf(a) < first_leaf(b); });
        std::size_t full = group.size() / 4 * 4;
        for (std::size_t i = 0; i < full; i += 4)
            by_side[2 * side].push_back(combine({group[i], group[i + 1], group[i + 2], group[i + 3]}));
        for (std::size_t i = full; i < group.size(); ++i) out.push_back(std::move(group[i]));
    }
    return out;
}

}  // namespace

TreePacking tree_pack(const TreeWeights& w, const Distribution& d) {
    const auto& ot = w.ot;
    TreePacking tp;
    tp.at.assign(ot.parent.size(), {});
    for (NodeId v : ot.postorder()) {
        if (ot.is_leaf(v)) {
            if (w.d[v] > 0) tp.at[v].push_back(TreeBlock{w.d[v], {PackedSquare{v, 0, 0, w.d[v]}}});
            continue;
        }
        std::vector<TreeBlock> all;
        for (NodeId u : ot.children[v])
            for (const auto& b : tp.at[u]) all.push_back(b);
        tp.at[v] = merge_blocks(std::move(all));
    }
    for (const auto& b : tp.at[ot.root])
        if (b.side > tp.top.side) tp.top = b;
    tp.plan.rows = i64(d.r_total());
    tp.plan.cols = i64(d.s_total());
    for (const auto& leaf : tp.top.leaves)
        tp.plan.regions.push_back({static_cast<NodeId>(leaf.item), leaf.row, leaf.col, leaf.side, leaf.side});
    tp.plan.scale = Magnitude::of(sz(d.total()));
    return tp;
}

CartesianRun tree_cartesian(const Topology& t, const Distribution& d) {
    if (d.r_total() != d.s_total()) throw std::invalid_argument("tree cartesian needs |R| = |S|");
    OrientedTree ot = orient(t, d.sizes());
    if (t.is_compute(ot.root)) return converge_run(t, d, ot.root, "converge");
    TreeWeights tw = tree_weights(t, d);
    TreePacking tp = tree_pack(tw, d);
    Simulation sim(t, d);
    sim.begin_round();
    for (NodeId v : t.compute_nodes())
        if (d.n(v) > 0) sim.charge(v, {ot.root}, d.n(v));
    sim.begin_round();
    execute_grid(sim, tp.plan.regions, Relation::R, all_of(d.r_total()), Relation::S, all_of(d.s_total()), ot.root);
    CartesianRun run;
    std::tie(run.trace, run.state) = sim.take();
    run.plan = tp.plan;
    run.strategy = "tree";
    return run;
}

UnequalPlan unequal_plan(std::int64_t rows, std::int64_t cols, const std::vector<NodeId>& nodes,
                         const std::vector<Bandwidth>& w) {
    UnequalPlan up;
    up.plan.rows = rows;
    up.plan.cols = cols;
    if (rows <= 0 || cols <= 0) return up;
    if (nodes.empty()) throw std::invalid_argument("no nodes to place");
    if (rows > cols) {
        UnequalPlan tr = unequal_plan(cols, rows, nodes, w);
        for (auto& p : tr.plan.regions) {
            std::swap(p.row, p.col);
            std::swap(p.height, p.width);
        }
        std::swap(tr.plan.rows, tr.plan.cols);
        return tr;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (w[i].is_infinite()) {
            up.plan.regions.push_back({nodes[i], 0, 0, rows, cols});
            up.plan.scale = Magnitude::of(0);
            return up;
        }
    std::vector<std::size_t> ord(nodes.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
        if (w[a].value() != w[b].value()) return w[a].value() > w[b].value();
        return nodes[a] < nodes[b];
    });
    Rational r = rows, s = cols;
    up.l_star = balance_root(r, s, w).hi;
    Rational l = up.l_star;
    for (;;) {
        std::vector<Placement> regions;
        std::int64_t col = 0;
        std::vector<std::pair<std::size_t, std::int64_t>> squares;
        for (auto i : ord) {
            Rational x = w[i].value() * l;
            if (x >= r) {
                std::int64_t width = ceil_i64(x);
                regions.push_back({nodes[i], 0, col, rows, width});
                col += width;
            } else {
                squares.emplace_back(i, to_i64(pow2_ceil(x)));
            }
        }
        if (col < cols && !squares.empty()) {
            std::int64_t big = squares.front().second;
            std::int64_t per_band = (rows + big - 1) / big;
            std::uint64_t cell_area = static_cast<std::uint64_t>(big) * static_cast<std::uint64_t>(big);
            std::uint64_t pos = 0;
            for (const auto& [i, side] : squares) {
                std::uint64_t cell = pos / cell_area;
                auto [dr, dc] = z_decode(pos % cell_area);
                std::int64_t band = static_cast<std::int64_t>(cell) / per_band;
                std::int64_t in_band = static_cast<std::int64_t>(cell) % per_band;
                regions.push_back({nodes[i], in_band * big + dr, col + band * big + dc, side, side});
                pos += static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side);
            }
        }
        if (covers_grid(regions, rows, cols)) {
            up.plan.regions = std::move(regions);
            up.l_used = l;
            up.plan.scale = Magnitude::of(l);
            return up;
        }
        if (++up.inflations > 400) throw std::logic_error("unequal packing failed to cover the grid");
        l = l * 9 / 8;
    }
}

CartesianRun whc_unequal(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    std::vector<Bandwidth> ws;
    for (std::size_t v = 0; v < sv.size(); ++v) ws.push_back(sv.w(v));
    UnequalPlan up = unequal_plan(i64(d.r_total()), i64(d.s_total()), sv.nodes, ws);
    Simulation sim(t, d);
    sim.begin_round();
    execute_grid(sim, up.plan.regions, Relation::R, all_of(d.r_total()), Relation::S, all_of(d.s_total()));
    CartesianRun run;
    std::tie(run.trace, run.state) = sim.take();
    run.plan = up.plan;
    run.strategy = "whc_unequal";
    return run;
}

CartesianRun generalized_star_cartesian(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    NodeId u = argmax_n(t, d);
    Relation small = d.r_total() <= d.s_total() ? Relation::R : Relation::S;
    Relation large = small == Relation::R ? Relation::S : Relation::R;
    std::size_t R = std::min(d.r_total(), d.s_total()), N = d.total();
    Labeling lab(d);
    std::vector<NodeId> alpha, beta;
    std::vector<Bandwidth> w_alpha;
    std::vector<Rational> w_beta;
    NodeId fastest = sv.nodes[0];
    for (std::size_t v = 0; v < sv.size(); ++v) {
        if (sv.w(sv.position(fastest)) < sv.w(v)) fastest = sv.nodes[v];
        if (std::min(sv.n(v), N - sv.n(v)) < R) {
            alpha.push_back(sv.nodes[v]);
            w_alpha.push_back(sv.w(v));
        } else {
            beta.push_back(sv.nodes[v]);
            w_beta.push_back(sv.w(v).is_infinite() ? Rational(1) : sv.w(v).value());
        }
    }
    bool beta_inf = false;
    for (NodeId b : beta) beta_inf = beta_inf || sv.w(sv.position(b)).is_infinite();
    if (beta_inf)
        for (std::size_t i = 0; i < beta.size(); ++i) w_beta[i] = sv.w(sv.position(beta[i])).is_infinite() ? 1 : 0;

    std::vector<CartesianRun> runs;
    if (2 * d.n(u) > d.total()) runs.push_back(converge_run(t, d, u, "converge"));
    runs.push_back(converge_run(t, d, fastest, "converge_max_bandwidth"));

    const auto& small_owner = lab.owner(small);
    const auto& large_owner = lab.owner(large);
    if (!beta.empty()) {
        Simulation sim(t, d);
        sim.begin_round();
        Batch b;
        for (std::size_t i = 0; i < small_owner.size(); ++i) b.add(small_owner[i], beta, small, static_cast<Index>(i));
        std::vector<Rational> weights;
        std::vector<NodeId> targets;
        for (std::size_t i = 0; i < beta.size(); ++i)
            if (w_beta[i] > 0) {
                weights.push_back(w_beta[i]);
                targets.push_back(beta[i]);
            }
        for (NodeId a : alpha) {
            std::size_t lo = 0;
            std::vector<Index> mine;
            for (std::size_t i = 0; i < large_owner.size(); ++i)
                if (large_owner[i] == a) mine.push_back(static_cast<Index>(i));
            auto alloc = proportional(weights, mine.size());
            for (std::size_t k = 0; k < targets.size() && lo < mine.size(); ++k)
                for (std::size_t c = 0; c < alloc[k] && lo < mine.size(); ++c) b.add(a, {targets[k]}, large, mine[lo++]);
        }
        b.flush(sim);
        CartesianRun run;
        std::tie(run.trace, run.state) = sim.take();
        run.strategy = "proportional";
        runs.push_back(std::move(run));
    }

    {
        std::vector<Index> rows = all_of(small_owner.size()), cols;
        std::vector<bool> is_alpha(t.node_count(), false);
        for (NodeId a : alpha) is_alpha[a] = true;
        for (std::size_t i = 0; i < large_owner.size(); ++i)
            if (is_alpha[large_owner[i]]) cols.push_back(static_cast<Index>(i));
        SquarePlan plan;
        if (!alpha.empty()) plan = unequal_plan(i64(rows.size()), i64(cols.size()), alpha, w_alpha).plan;
        Simulation sim(t, d);
        sim.begin_round();
        auto rs = grid_spans(plan.regions, true, rows.size());
        auto cs = grid_spans(plan.regions, false, cols.size());
        Batch b;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto dests = rs[i];
            dests.insert(dests.end(), beta.begin(), beta.end());
            b.add(small_owner[rows[i]], dests, small, rows[i]);
        }
        for (std::size_t j = 0; j < cols.size(); ++j) b.add(large_owner[cols[j]], cs[j], large, cols[j]);
        b.flush(sim);
        CartesianRun run;
        std::tie(run.trace, run.state) = sim.take();
        run.plan = plan;
        run.strategy = "whc_unequal_alpha";
        runs.push_back(std::move(run));
    }

    std::size_t best = 0;
    Rational best_cost = cost(runs[0].trace, t).tuple_cost;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        Rational c = cost(runs[i].trace, t).tuple_cost;
        if (c < best_cost) {
            best = i;
            best_cost = c;
        }
    }
    return std::move(runs[best]);
}

}  // namespace tamp

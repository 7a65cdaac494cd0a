#include <doctest.h>

#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/star.hpp"

#include "../gen.hpp"

#include <algorithm>

using namespace tamp;

namespace {

std::vector<Placement> placed(const Packing& pk) {
    std::vector<Placement> out;
    for (const auto& q : pk.squares) out.push_back({static_cast<NodeId>(q.item), q.row, q.col, q.side, q.side});
    return out;
}

std::int64_t side_of(const SquarePlan& p, NodeId v) {
    for (const auto& r : p.regions)
        if (r.node == v) return r.height;
    return 0;
}

}  // namespace

TEST_CASE("square packing examples") {
    Packing four = pack_squares({2, 2, 2, 2});
    CHECK(four.covered == 4);
    CHECK(disjoint(placed(four)));

    Packing mixed = pack_squares({4, 2, 2, 2});
    CHECK(mixed.covered >= 4);
    CHECK(covers_grid(placed(mixed), 4, 4));
    CHECK(disjoint(placed(mixed)));

    Packing one = pack_squares({1});
    CHECK(one.covered == 1);
}

TEST_CASE("square packing on random multisets") {
    Rng rng(51);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::int64_t> sides(gen::uniform(rng, 1, 30));
        Integer area = 0;
        for (auto& s : sides) {
            s = std::int64_t(1) << gen::uniform(rng, 0, 5);
            area += Integer(s) * s;
        }
        Packing pk = pack_squares(sides);
        auto regions = placed(pk);
        CHECK(disjoint(regions));
        CHECK(covers_grid(regions, pk.covered, pk.covered));
        CHECK(Integer(4) * pk.covered * pk.covered >= area);
    }
}

TEST_CASE("wHC plan examples") {
    Topology s = build_symmetric_star({1, 1, 1, 1});
    Distribution d = counts_instance(s, {1, 1, 1, 1}, {1, 1, 1, 1}, 1);
    SquarePlan p = whc_plan(s, d);
    CHECK(p.scale == Magnitude::of(4));
    for (NodeId v : s.compute_nodes()) CHECK(side_of(p, v) == 4);
    CHECK(covers_grid(p.regions, 4, 4));

    Topology w = build_symmetric_star({1, 2});
    Distribution dw = counts_instance(w, {2, 1}, {1, 2}, 1);
    SquarePlan pw = whc_plan(w, dw);
    CHECK(pw.scale == Magnitude::sqrt_of(Rational(36, 5)));
    CHECK(side_of(pw, w.node_by_name("v1")) == 4);
    CHECK(side_of(pw, w.node_by_name("v2")) == 8);

    Topology one = build_symmetric_star({3});
    Distribution d1 = counts_instance(one, {5}, {5}, 1);
    SquarePlan p1 = whc_plan(one, d1);
    CHECK(side_of(p1, one.node_by_name("v1")) >= 5);
    CHECK_THROWS(whc_plan(one, counts_instance(one, {2}, {5}, 1)));
}

TEST_CASE("wHC execution") {
    Topology s = build_symmetric_star({1, 1, 1, 1});
    Rng rng(52);
    Distribution d = gen::balanced(rng, s, 4);
    CartesianRun run = whc_execute(s, d, whc_plan(s, d));
    CHECK(verify_cartesian(run.state, d).ok);
    NodeId o = s.node_by_name("o");
    for (NodeId v : s.compute_nodes()) {
        CHECK(run.trace.total_on(s.edge_between(o, v)) <= 16);
        CHECK(run.trace.total_on(s.edge_between(v, o)) <= d.n(v));
    }

    Topology one = build_symmetric_star({2});
    Distribution d1 = counts_instance(one, {3}, {3}, 1);
    CartesianRun r1 = whc_execute(one, d1, whc_plan(one, d1));
    CHECK(cost(r1.trace, one).tuple_cost == 0);
    CHECK(verify_cartesian(r1.state, d1).ok);

    Topology eight = build_symmetric_star({1, 1});
    Distribution d8 = gen::balanced(rng, eight, 8);
    CHECK(verify_cartesian(whc_execute(eight, d8, whc_plan(eight, d8)).state, d8).ok);
}

TEST_CASE("star cartesian branches") {
    Topology s = build_symmetric_star({1, 2, 1});
    Distribution all = counts_instance(s, {0, 5, 0}, {0, 5, 0}, 1);
    CartesianRun a = star_cartesian(s, all);
    CHECK(cost(a.trace, s).tuple_cost == 0);

    Distribution heavy = counts_instance(s, {1, 3, 1}, {1, 3, 1}, 1);
    CartesianRun h = star_cartesian(s, heavy);
    CHECK(h.strategy == "converge");
    CHECK(cost(h.trace, s).tuple_cost == std::max(Rational(4, 2), Rational(2, 1)));
    CHECK(verify_cartesian(h.state, heavy).ok);

    Distribution even = counts_instance(s, {2, 2, 2}, {2, 2, 2}, 1);
    CartesianRun e = star_cartesian(s, even);
    CHECK(e.strategy == "whc");
    CHECK(verify_cartesian(e.state, even).ok);
}

TEST_CASE("tree weights") {
    Topology s = build_symmetric_star({1, 1, 1, 1});
    Distribution d = counts_instance(s, {1, 1, 1, 1}, {1, 1, 1, 1}, 1);
    TreeWeights tw = tree_weights(s, d);
    for (NodeId v : s.compute_nodes()) {
        CHECK(tw.l2[v] == Rational(1, 4));
        CHECK(tw.d[v] == 4);
    }

    Topology t = gen::tree4();
    Distribution dt = counts_instance(t, {1, 1, 1, 1}, {1, 1, 1, 1}, 1);
    TreeWeights tt = tree_weights(t, dt);
    CHECK(tt.w2[t.node_by_name("a")].value == 1);
    CHECK(tt.w2[t.node_by_name("b")].value == 1);
    CHECK(tt.w2[t.node_by_name("o")].value == 2);
    CHECK(tt.l2[t.node_by_name("a")] == Rational(1, 2));
    CHECK(tt.l2[t.node_by_name("v1")] == Rational(1, 4));
}

TEST_CASE("tree packing") {
    Topology s = build_symmetric_star({1, 1, 1, 1});
    Distribution d = counts_instance(s, {2, 2, 2, 2}, {2, 2, 2, 2}, 1);
    TreeWeights tw = tree_weights(s, d);
    TreePacking tp = tree_pack(tw, d);
    CHECK(tp.top.side == 2 * tw.d[s.compute_nodes()[0]]);
    CHECK(covers_grid(tp.plan.regions, 8, 8));

    Topology t = gen::tree4();
    Distribution dt = counts_instance(t, {1, 2, 1, 2}, {2, 1, 2, 1}, 1);
    TreePacking pt = tree_pack(tree_weights(t, dt), dt);
    CHECK(covers_grid(pt.plan.regions, 6, 6));
    CHECK(disjoint(pt.plan.regions));
}

TEST_CASE("tree cartesian") {
    Topology t = gen::tree4();
    Distribution heavy = counts_instance(t, {5, 0, 0, 1}, {5, 0, 1, 0}, 1);
    CartesianRun h = tree_cartesian(t, heavy);
    CHECK(h.trace.round_count() == 1);
    CHECK(verify_cartesian(h.state, heavy).ok);

    Distribution even = counts_instance(t, {2, 2, 2, 2}, {2, 2, 2, 2}, 1);
    CartesianRun e = tree_cartesian(t, even);
    CHECK(e.trace.round_count() == 2);
    CHECK(verify_cartesian(e.state, even).ok);

    Distribution gaps = counts_instance(t, {4, 0, 4, 0}, {4, 0, 4, 0}, 1);
    CartesianRun g = tree_cartesian(t, gaps);
    CHECK(verify_cartesian(g.state, gaps).ok);
    NodeId v2 = t.node_by_name("v2");
    CHECK(side_of(g.plan, v2) > 0);
}

TEST_CASE("unequal plans") {
    Topology one = build_symmetric_star({5});
    Distribution d1 = counts_instance(one, {2}, {9}, 1);
    CartesianRun r1 = whc_unequal(one, d1);
    CHECK(r1.plan.regions.size() == 1);
    CHECK(verify_cartesian(r1.state, d1).ok);

    UnequalPlan up = unequal_plan(2, 8, {1, 2}, {1, 1});
    CHECK(covers_grid(up.plan.regions, 2, 8));
    CHECK(balance_lhs(up.l_star, 2, {1, 1}) >= 16);
    CHECK(up.l_used >= up.l_star);

    Rng rng(53);
    for (int i = 0; i < 50; ++i) {
        Topology s = gen::star(rng, gen::uniform(rng, 1, 8), 6);
        Distribution d = gen::balanced(rng, s, gen::uniform(rng, 1, 200));
        Rational u = cost(whc_unequal(s, d).trace, s).tuple_cost;
        Rational w = cost(whc_execute(s, d, whc_plan(s, d)).trace, s).tuple_cost;
        CHECK(u <= 2 * w);
    }
}

TEST_CASE("generalized star cartesian") {
    Topology s = build_symmetric_star({1, 1, 1});
    Distribution wide = counts_instance(s, {1, 1, 1}, {5, 5, 5}, 1);
    CartesianRun w = generalized_star_cartesian(s, wide);
    CHECK(verify_cartesian(w.state, wide).ok);

    Rng rng(54);
    std::size_t within = 0, runs = 100;
    for (std::size_t i = 0; i < runs; ++i) {
        Topology t = gen::star(rng, gen::uniform(rng, 1, 8), 6);
        std::size_t r = gen::uniform(rng, 1, 60);
        Distribution d = gen::counts(rng, t, r, r + gen::uniform(rng, 0, 400));
        CartesianRun run = generalized_star_cartesian(t, d);
        Verdict v = verify_cartesian(run.state, d);
        CHECK_MESSAGE(v.ok, v.witness);
        within += Magnitude::of(cost(run.trace, t).tuple_cost) <= lb_cp_unequal(t, d).value * Rational(4);
    }
    MESSAGE("generalized star within 4x of the unequal bound on " << within << "/" << runs);
    CHECK(within == runs);
}

TEST_CASE("cartesian protocols on random inputs") {
    Rng rng(55);
    for (int i = 0; i < 100; ++i) {
        Topology t = gen::tree(rng, gen::uniform(rng, 2, 10), 5, 5);
        Distribution d = gen::balanced(rng, t, gen::uniform(rng, 0, 120));
        Verdict v = verify_cartesian(tree_cartesian(t, d).state, d);
        CHECK_MESSAGE(v.ok, v.witness);
    }
}

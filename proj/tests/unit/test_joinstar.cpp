#include <doctest.h>

#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/joinstar.hpp"

#include "../gen.hpp"

#include <algorithm>
#include <map>

using namespace tamp;

TEST_CASE("weighted hash") {
    Topology s = build_symmetric_star({1, 1, 1, 1});
    HashFunction h = weighted_hash(s, 3);
    std::map<NodeId, std::size_t> hits;
    for (Key k = 0; k < 8000; ++k) ++hits[h(k)];
    CHECK(hits.size() == 4);
    for (auto& [v, c] : hits) CHECK((c > 1800 && c < 2200));

    Topology big = build_symmetric_star({1000, 1, 1});
    HashFunction hb = weighted_hash(big, 3);
    std::size_t at_big = 0;
    for (Key k = 0; k < 5000; ++k) at_big += hb(k) == big.node_by_name("v1");
    CHECK(at_big >= 4950);
    CHECK(weighted_hash_support(big) == std::vector<NodeId>{big.node_by_name("v1")});

    Distribution d = uniform_instance(big, 300, 400, 2, 500);
    JoinRun run = weighted_hash_join(big, d, 5);
    CHECK(verify_join(run.state, d).ok);
    NodeId o = big.node_by_name("o"), v1 = big.node_by_name("v1");
    CHECK(run.trace.total_on(big.edge_between(o, v1)) <= d.total());
}

TEST_CASE("skew splitting") {
    auto same = split_skew(4, 3, 3);
    REQUIRE(same.size() == 1);
    CHECK(same[0].r == 3);
    CHECK(same[0].s == 3);

    auto split = split_skew(4, 2, 5);
    REQUIRE(split.size() == 3);
    CHECK(split[0].s == 2);
    CHECK(split[1].s == 2);
    CHECK(split[2].s == 1);
    for (const auto& v : split) CHECK(v.r == 2);
    CHECK(split[1].s_begin == 2);

    auto flipped = split_skew(4, 5, 2);
    REQUIRE(flipped.size() == 3);
    for (const auto& v : flipped) CHECK(v.s == 2);

    CHECK(split_skew(4, 0, 5).empty());
}

TEST_CASE("PackEQCP") {
    EqPlan one = pack_eqcp(1, 4, {4}, 1);
    REQUIRE(one.feasible);
    REQUIRE(one.steps.size() == 1);
    CHECK(one.steps[0].absorb);

    EqPlan three = pack_eqcp(3, 6, {2, 2, 2}, 3);
    REQUIRE(three.feasible);
    CHECK(three.steps.size() == 3);
    for (const auto& s : three.steps) CHECK(s.absorb);

    EqPlan mixed = pack_eqcp(2, 8, {2, 2, 2, 2, 4}, 2);
    REQUIRE(mixed.feasible);
    bool any_whc = false;
    for (const auto& s : mixed.steps) any_whc = any_whc || !s.absorb;
    CHECK(any_whc);

    CHECK_FALSE(pack_eqcp(3, 10, {1}, 1).feasible);
}

TEST_CASE("PackCP base cases") {
    PackStrategy empty = packcp({}, {1, 2});
    CHECK(empty.cost == Magnitude::of(0));

    PackStrategy single = packcp({6}, {3});
    CHECK(single.cost == Magnitude::of(2));
    CHECK(pack_cost(single.steps, {6}, {3}) == single.cost);

    PackStrategy none = packcp({2}, {});
    CHECK_FALSE(none.feasible);
    CHECK(none.cost.is_infinite());
}

TEST_CASE("PackCP plan re-costs to the table value") {
    Rng rng(71);
    for (int i = 0; i < 300; ++i) {
        std::vector<Rational> sizes(gen::uniform(rng, 1, 6));
        for (auto& s : sizes) s = static_cast<long long>(2 * gen::uniform(rng, 1, 10));
        std::sort(sizes.begin(), sizes.end());
        std::vector<Bandwidth> w(gen::uniform(rng, 1, 6));
        for (auto& x : w) x = gen::bandwidth(rng, 5);
        std::sort(w.begin(), w.end());
        PackStrategy ps = packcp(sizes, w);
        CHECK(pack_cost(ps.steps, sizes, w) == ps.cost);
        CHECK(ps.table[sizes.size()][w.size()] == ps.cost);
        std::vector<bool> key_seen(sizes.size(), false), node_seen(w.size(), false);
        for (const auto& st : ps.steps) {
            for (std::size_t k = st.key_first; k <= st.key_last; ++k) {
                CHECK_FALSE(key_seen[k]);
                key_seen[k] = true;
            }
            for (std::size_t v = st.node_first; v <= st.node_last; ++v) {
                CHECK_FALSE(node_seen[v]);
                node_seen[v] = true;
            }
        }
        CHECK(std::all_of(key_seen.begin(), key_seen.end(), [](bool b) { return b; }));
    }
}

TEST_CASE("star join paths") {
    Topology s = build_symmetric_star({1, 1, 1, 1, 1, 1, 1, 1});
    Distribution light = uniform_instance(s, 200, 300, 4, 400);
    JoinRun lr = star_join(s, light, 1);
    CHECK(lr.stats.heavy.empty());
    CHECK(lr.strategy == "hash");
    CHECK(verify_join(lr.state, light).ok);

    Distribution one = Distribution::empty(s);
    auto cs = s.compute_nodes();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        one.r[cs[i]].assign(3, 9);
        one.s[cs[i]].assign(3, 9);
    }
    JoinRun pr = star_join(s, one, 2);
    CHECK(pr.strategy == "hash+packcp");
    CHECK(pr.stats.heavy == std::vector<Key>{9});
    CHECK(verify_join(pr.state, one).ok);
    Distribution as_cp = counts_instance(s, std::vector<std::size_t>(8, 3), std::vector<std::size_t>(8, 3), 1);
    Rational whc = cost(star_cartesian(s, as_cp).trace, s).tuple_cost;
    CHECK(cost(pr.trace, s).tuple_cost <= 2 * whc);

    Topology eight = build_symmetric_star({1, 1, 1, 1, 1, 1, 1, 1});
    Distribution z = skewed_join_instance(eight, 400, 1600, 1.2, 6, 300);
    JoinRun zr = star_join(eight, z, 3);
    CHECK(verify_join(zr.state, z).ok);
    double ratio = cost(zr.trace, eight).tuple_cost.convert_to<double>() / lb_join_star(eight, z).value.to_double();
    MESSAGE("zipf 1.2 join cost ratio " << ratio);

    Distribution conv = counts_instance(s, {1, 1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 10, 0, 0, 0, 0}, 3, 12);
    CHECK(star_join(s, conv, 1).strategy == "converge");
}

TEST_CASE("star join on random skewed inputs") {
    Rng rng(72);
    for (int i = 0; i < 80; ++i) {
        Topology t = gen::star(rng, gen::uniform(rng, 1, 10), 6, 5);
        std::size_t r = gen::uniform(rng, 1, 300);
        double z = 0.5 + double(gen::uniform(rng, 0, 15)) / 10;
        Distribution d = skewed_join_instance(t, r, r + gen::uniform(rng, 0, 600), z, rng(), gen::uniform(rng, 1, 200));
        JoinRun run = star_join(t, d, rng());
        Verdict v = verify_join(run.state, d);
        CHECK_MESSAGE(v.ok, v.witness);
    }
}

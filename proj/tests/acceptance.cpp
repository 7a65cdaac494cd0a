#include "cli.hpp"
#include "gen.hpp"

#include "tamp/asymstar.hpp"
#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/intersect.hpp"
#include "tamp/joinstar.hpp"
#include "tamp/oracle.hpp"
#include "tamp/sortnet.hpp"
#include "tamp/star.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace tamp;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

std::uint64_t on_edge(const TrafficTrace& tr, EdgeId e, std::optional<std::size_t> round = std::nullopt) {
    if (round) return *round < tr.rounds.size() ? tr.rounds[*round][e] : 0;
    return tr.total_on(e);
}

std::vector<std::size_t> r_sizes(const Distribution& d, const std::vector<NodeId>& nodes) {
    std::vector<std::size_t> out;
    for (NodeId v : nodes) out.push_back(d.r_size(v));
    return out;
}

// 1
Outcome correctness() {
    const char* names[] = {"star_intersect", "tree_intersect", "star_cartesian", "tree_cartesian", "whc_unequal",
                           "generalized_star_cartesian", "wts_sort", "terasort", "star_join", "sf_star_intersect",
                           "rf_star_intersect", "asym_star_intersect"};
    const std::size_t kinds = std::size(names);
    std::size_t runs = 500, ok = 0;
    std::string first_failure;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(1000 + i);
        std::size_t kind = i % kinds;
        std::size_t p = gen::uniform(rng, 2, 16);
        std::size_t n = gen::uniform(rng, 2, 4096);
        Verdict v;
        switch (kind) {
        case 0: {
            Topology t = gen::star(rng, p, 8, 5);
            Distribution d = uniform_instance(t, n / 3, n - n / 3, rng(), static_cast<Key>(n));
            v = verify_intersection(star_intersect(t, d, rng()).state, d);
            break;
        }
        case 1: {
            Topology t = gen::tree(rng, p, 8, 5);
            Distribution d = uniform_instance(t, n / 2, n - n / 2, rng(), static_cast<Key>(n));
            v = verify_intersection(tree_intersect(t, d, rng()).state, d);
            break;
        }
        case 2: {
            Topology t = gen::star(rng, p, 8, 5);
            Distribution d = gen::balanced(rng, t, n / 2);
            v = verify_cartesian(star_cartesian(t, d).state, d);
            break;
        }
        case 3: {
            Topology t = gen::tree(rng, p, 8, 5);
            Distribution d = gen::balanced(rng, t, n / 2);
            v = verify_cartesian(tree_cartesian(t, d).state, d);
            break;
        }
        case 4: {
            Topology t = gen::star(rng, p, 8, 5);
            std::size_t r = gen::uniform(rng, 1, n / 2 + 1);
            Distribution d = uniform_instance(t, r, n - r + 1, rng());
            v = verify_cartesian(whc_unequal(t, d).state, d);
            break;
        }
        case 5: {
            Topology t = gen::star(rng, p, 8, 5);
            std::size_t r = gen::uniform(rng, 1, n / 2 + 1);
            Distribution d = gen::counts(rng, t, r, n - r + 1);
            v = verify_cartesian(generalized_star_cartesian(t, d).state, d);
            break;
        }
        case 6:
        case 7: {
            Topology t = (i % 2) ? gen::tree(rng, p, 8) : gen::star(rng, p, 8);
            Distribution d = gen::counts(rng, t, n, 0);
            SortRun run = kind == 6 ? wts_sort(t, d, rng()) : terasort(t, d, rng());
            v = verify_sorted(run.state, d, run.order);
            break;
        }
        case 8: {
            Topology t = gen::star(rng, p, 8, 5);
            double z = 0.5 + static_cast<double>(gen::uniform(rng, 0, 15)) / 10.0;
            std::size_t r = gen::uniform(rng, 1, n / 2);
            Distribution d = skewed_join_instance(t, r, n - r, z, rng(), gen::uniform(rng, 1, n));
            v = verify_join(star_join(t, d, rng()).state, d);
            break;
        }
        case 9: {
            Topology t = gen::asym_star(rng, p, 8, true, false);
            Distribution d = uniform_instance(t, n / 3, n - n / 3, rng(), static_cast<Key>(n));
            v = verify_intersection(sf_star_intersect(t, d, rng()).state, d);
            break;
        }
        case 10: {
            Topology t = gen::asym_star(rng, p, 8, false, true);
            Distribution d = uniform_instance(t, n / 3, n - n / 3, rng(), static_cast<Key>(n));
            v = verify_intersection(rf_star_intersect(t, d).state, d);
            break;
        }
        default: {
            Topology t = gen::asym_star(rng, p, 8, false, false);
            Distribution d = uniform_instance(t, n / 3, n - n / 3, rng(), static_cast<Key>(n));
            v = verify_intersection(asym_star_intersect(t, d, rng()).state, d);
            break;
        }
        }
        if (v) ++ok;
        else if (first_failure.empty()) first_failure = std::string(names[kind]) + " run " + std::to_string(i) + ": " + v.witness;
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs verified" +
                            (first_failure.empty() ? "" : "; first failure " + first_failure)};
}

// 2
Outcome sandwich() {
    std::size_t total = 0, ok = 0, raw_below = 0;
    std::string first;
    for (std::size_t i = 0; i < 100; ++i) {
        Rng rng(2000 + i);
        Task task = static_cast<Task>(i % 3);
        std::size_t p = gen::uniform(rng, 2, 3);
        Topology t = gen::star(rng, p, 4);
        Distribution d;
        if (task == Task::Intersect) {
            d = gen::matched(rng, t, gen::uniform(rng, 1, 4));
        } else {
            std::size_t half = gen::uniform(rng, 1, 4);
            d = Distribution::empty(t);
            auto cs = t.compute_nodes();
            for (std::size_t k = 0; k < half; ++k) {
                Key key = task == Task::Join ? 7 : static_cast<Key>(k + 1);
                d.r[cs[gen::uniform(rng, 0, p - 1)]].push_back(key);
                d.s[cs[gen::uniform(rng, 0, p - 1)]].push_back(task == Task::Join ? key : key + 100);
            }
        }
        SandwichReport rep = sandwich_check(t, d, task, rng());
        ++total;
        if (rep.ok) ++ok;
        else if (first.empty())
            first = to_string(task) + " instance " + std::to_string(i) + ": lb_scaled=" + render(rep.lb_scaled) +
                    " opt=" + render(rep.opt) + " alg=" + render(rep.alg);
        if (rep.lb <= Magnitude::of(rep.opt)) ++raw_below;
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " sandwiches hold; unscaled bound <= opt on " +
                             std::to_string(raw_below) + (first.empty() ? "" : "; first violation " + first)};
}

// 3
Outcome whc_bounds() {
    std::size_t runs = 200, ok = 0;
    std::string first;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(3000 + i);
        std::size_t p = gen::uniform(rng, 1, 12);
        Topology t = gen::star(rng, p, 9);
        Distribution d = gen::balanced(rng, t, gen::uniform(rng, 1, 600));
        SquarePlan plan = whc_plan(t, d);
        CartesianRun run = whc_execute(t, d, plan);
        StarView sv = star_view(t, d);
        bool good = verify_cartesian(run.state, d).ok;
        Rational sum_w2 = 0;
        Magnitude nodes_term = Magnitude::of(0);
        for (std::size_t v = 0; v < sv.size(); ++v) {
            Rational w = sv.w(v).value();
            sum_w2 += w * w;
            nodes_term = max(nodes_term, Magnitude::of(sz(sv.n(v)) / w));
            Rational got = sz(on_edge(run.trace, t.edge_between(sv.center, sv.nodes[v])));
            if (Magnitude::of(got) > plan.scale * (4 * w)) good = false;
        }
        Magnitude bound = max(nodes_term, Magnitude::sqrt_of(sz(d.total()) * sz(d.total()) / sum_w2)) * Rational(4);
        if (Magnitude::of(cost(run.trace, t).tuple_cost) > bound) good = false;
        if (good) ++ok;
        else if (first.empty()) first = "instance " + std::to_string(i);
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs within both bounds" +
                            (first.empty() ? "" : "; first failure " + first)};
}

// 4
Outcome packing() {
    std::size_t runs = 500, ok = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(4000 + i);
        std::vector<std::int64_t> sides(gen::uniform(rng, 1, 40));
        Integer area = 0;
        for (auto& s : sides) {
            s = std::int64_t(1) << gen::uniform(rng, 0, 6);
            area += Integer(s) * s;
        }
        Packing pk = pack_squares(sides);
        std::vector<Placement> regions;
        for (const auto& q : pk.squares) regions.push_back({static_cast<NodeId>(q.item), q.row, q.col, q.side, q.side});
        bool good = disjoint(regions) && covers_grid(regions, pk.covered, pk.covered) &&
                    Integer(4) * pk.covered * pk.covered >= area && pk.squares.size() == sides.size();
        if (good) ++ok;
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " packings disjoint and covering"};
}

// 5
Outcome partitions() {
    std::size_t runs = 500, ok = 0, worst_num = 0, worst_den = 1;
    std::string first;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(5000 + i);
        Topology t = gen::tree(rng, gen::uniform(rng, 2, 20), 6);
        Distribution d = gen::counts(rng, t, gen::uniform(rng, 1, 120), gen::uniform(rng, 1, 200));
        Partition p = balanced_partition(t, d);
        Verdict v = check_balanced_partition(t, d, p);
        bool visits = p.visits <= 3 * t.node_count();
        if (p.visits * worst_den > worst_num * t.node_count()) {
            worst_num = p.visits;
            worst_den = t.node_count();
        }
        if (v && visits) ++ok;
        else if (first.empty()) first = "tree " + std::to_string(i) + ": " + (v ? "visit count" : v.witness);
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " partitions valid; max visits/|V| = " +
                            std::to_string(worst_num) + "/" + std::to_string(worst_den) +
                            (first.empty() ? "" : "; first failure " + first)};
}

// 6
Outcome orientation() {
    std::size_t runs = 1000, ok = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(6000 + i);
        Topology t = gen::tree(rng, gen::uniform(rng, 2, 30), 4);
        std::vector<Rational> sizes(t.node_count(), 0);
        for (NodeId v : t.compute_nodes()) sizes[v] = sz(gen::uniform(rng, 0, 3) == 0 ? 0 : gen::uniform(rng, 0, 50));
        sizes[t.compute_nodes()[0]] += 1;
        OrientedTree ot = orient(t, sizes);
        std::size_t roots = 0;
        bool good = true;
        for (NodeId v = 0; v < t.node_count(); ++v)
            if (!ot.parent[v]) ++roots;
        std::size_t oriented = 0;
        for (const auto& [a, b] : skeleton_edges(t)) {
            bool ab = ot.parent[a] && *ot.parent[a] == b, ba = ot.parent[b] && *ot.parent[b] == a;
            if (ab != ba) ++oriented;
        }
        good = roots == 1 && oriented == skeleton_edges(t).size() && !ot.parent[ot.root];
        if (good) ++ok;
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " orientations with out-degree <= 1 and one root"};
}

// 7
Outcome tree_cartesian_accounting() {
    std::size_t runs = 0, ok = 0, skipped = 0;
    Rational worst = 0;
    std::string first;
    for (std::size_t i = 0; runs < 150 && i < 1000; ++i) {
        Rng rng(7000 + i);
        Topology t = gen::tree(rng, gen::uniform(rng, 2, 12), 6);
        Distribution d = gen::balanced(rng, t, gen::uniform(rng, 1, 300));
        OrientedTree ot = orient(t, d.sizes());
        ++runs;
        if (t.is_compute(ot.root)) {
            ++skipped;
            if (verify_cartesian(tree_cartesian(t, d).state, d).ok) ++ok;
            continue;
        }
        TreeWeights tw = tree_weights(t, d);
        CartesianRun run = tree_cartesian(t, d);
        bool good = verify_cartesian(run.state, d).ok && run.trace.round_count() == 2;
        TreeIndex idx(t);
        auto sizes = d.sizes();
        Rational n = sz(d.total());
        for (NodeId u = 0; u < t.node_count(); ++u) {
            if (!ot.parent[u]) continue;
            NodeId p = *ot.parent[u];
            EdgeId down = t.edge_between(p, u), up = t.edge_between(u, p);
            Rational phase2 = sz(on_edge(run.trace, down, 1)) + sz(on_edge(run.trace, up, 1));
            if (tw.l2[u] > 0) worst = std::max(worst, Rational(phase2 * phase2 / (n * n * tw.l2[u])));
            if (phase2 * phase2 > 256 * n * n * tw.l2[u]) good = false;
            auto [tail, head] = idx.side_sums(up, sizes);
            Rational phase1 = sz(on_edge(run.trace, up, 0)) + sz(on_edge(run.trace, down, 0));
            if (phase1 > std::min(tail, head)) good = false;
        }
        if (good) ++ok;
        else if (first.empty()) first = "instance " + std::to_string(i);
    }
    std::ostringstream msg;
    msg << ok << "/" << runs << " runs within phase bounds (" << skipped
        << " rooted at a compute node, checked for coverage only); max phase-2 traffic / (N l_u) = "
        << std::sqrt(worst.convert_to<double>());
    if (!first.empty()) msg << "; first failure " << first;
    return {ok == runs, msg.str()};
}

// 8
Outcome proportional_properties() {
    std::size_t runs = 10000, ok = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(8000 + i);
        std::vector<Rational> w(gen::uniform(rng, 1, 10));
        Rational total = 0;
        for (auto& x : w) {
            x = Rational(static_cast<long long>(gen::uniform(rng, 1, 1000)));
            total += x;
        }
        std::size_t n = gen::uniform(rng, 0, 500);
        auto alloc = proportional(w, n);
        bool good = alloc.size() == w.size();
        std::vector<Rational> got(w.size() + 1, 0), ideal(w.size() + 1, 0);
        for (std::size_t j = 0; j < w.size(); ++j) {
            got[j + 1] = got[j] + sz(alloc[j]);
            ideal[j + 1] = ideal[j] + w[j] / total * sz(n);
            Rational gap = got[j + 1] - ideal[j + 1];
            if (gap < -1 || gap > 1) good = false;
        }
        for (std::size_t a = 0; a < w.size(); ++a)
            for (std::size_t b = a + 1; b <= w.size(); ++b)
                if ((got[b] - got[a]) - (ideal[b] - ideal[a]) > 1) good = false;
        if (got.back() < sz(n)) good = false;
        if (good) ++ok;
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " allocations satisfy all three properties"};
}

// 9
Outcome wts() {
    std::size_t runs = 50, always = 0, samples_ok = 0, receive_ok = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(9000 + i);
        std::size_t p = gen::uniform(rng, 2, 6);
        Topology t = (i % 2) ? gen::tree(rng, p, 6) : gen::star(rng, p, 6);
        auto cs = t.compute_nodes();
        std::vector<std::size_t> rc(cs.size());
        for (auto& c : rc) c = gen::uniform(rng, 0, 1200);
        std::size_t n = 0;
        for (auto c : rc) n += c;
        double need = 4.0 * double(cs.size() * cs.size()) * std::log(double(cs.size()) * double(n));
        if (double(n) < need) rc[0] += static_cast<std::size_t>(need) + 1;
        Distribution d = counts_instance(t, rc, std::vector<std::size_t>(cs.size(), 0), rng());
        SortRun run = wts_sort(t, d, rng());
        bool sorted = verify_sorted(run.state, d, run.order).ok && run.trace.round_count() == 4;
        bool m_ok = true;
        for (std::size_t j = 0; j < run.plan.heavy.size(); ++j)
            if (run.plan.post_round1_sizes[j] > 4 * d.r_size(run.plan.heavy[j])) m_ok = false;
        if (sorted && m_ok) ++always;
        double rho_n = run.plan.rho * double(d.r_total());
        std::uint64_t sample_traffic = 0;
        for (auto x : run.trace.rounds[1]) sample_traffic = std::max(sample_traffic, x);
        if (double(sample_traffic) <= 2 * rho_n) ++samples_ok;
        bool recv = true;
        for (std::size_t j = 0; j < run.plan.heavy.size(); ++j) {
            NodeId v = run.plan.heavy[j];
            std::uint64_t got = 0;
            for (EdgeId e = 0; e < t.edge_count(); ++e)
                if (t.edge(e).to == v) got += run.trace.rounds[3][e];
            if (got > 20 * d.r_size(v)) recv = false;
        }
        if (recv) ++receive_ok;
    }
    bool pass = always == runs && samples_ok * 100 >= 95 * runs && receive_ok * 100 >= 95 * runs;
    return {pass, "sorted in 4 rounds with M_j <= 4 N_j: " + std::to_string(always) + "/" + std::to_string(runs) +
                      "; sample traffic <= 2 rho N: " + std::to_string(samples_ok) +
                      "; round-4 receive <= 20 N_j: " + std::to_string(receive_ok)};
}

// 10
Outcome intersect_ratios() {
    std::size_t runs = 200;
    std::size_t star_ok = 0, tree_ok = 0;
    double star_c = 0, tree_c = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(10000 + i);
        std::size_t p = gen::uniform(rng, 2, 12);
        std::size_t n = gen::uniform(rng, 16, 2000);
        for (int kind = 0; kind < 2; ++kind) {
            Topology t = kind == 0 ? gen::star(rng, p, 8) : gen::tree(rng, p, 8);
            std::size_t r = gen::uniform(rng, 1, n / 2);
            Distribution d = gen::counts(rng, t, r, n - r, static_cast<Key>(n));
            if (d.r_total() == 0 || d.s_total() == 0) d.r[t.compute_nodes()[0]].push_back(1), d.s[t.compute_nodes()[0]].push_back(1);
            IntersectRun run = kind == 0 ? star_intersect(t, d, rng()) : tree_intersect(t, d, rng());
            double c = cost(run.trace, t).tuple_cost.convert_to<double>();
            double lb = lb_intersect_tree(t, d).value.to_double();
            double big_n = double(d.total());
            double scale = std::log(big_n) * std::log(double(t.node_count()));
            bool good = c <= 8 * scale * lb + 1e-9;
            double constant = lb > 0 ? c / (lb * scale) : 0;
            (kind == 0 ? star_ok : tree_ok) += good;
            (kind == 0 ? star_c : tree_c) = std::max(kind == 0 ? star_c : tree_c, constant);
        }
    }
    bool pass = star_ok * 100 >= 95 * runs && tree_ok * 100 >= 95 * runs;
    std::ostringstream msg;
    msg << "star " << star_ok << "/" << runs << ", tree " << tree_ok << "/" << runs
        << " within 8 ln N ln|V| C_LB; max measured constant star " << star_c << ", tree " << tree_c;
    return {pass, msg.str()};
}

// 11
Outcome packcp_quality() {
    std::size_t runs = 400, ok = 0;
    double worst = 1;
    std::string first;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(11000 + i);
        std::size_t k = gen::uniform(rng, 1, 4), n = gen::uniform(rng, 1, 4);
        std::vector<Rational> sizes(k);
        for (auto& s : sizes) s = Rational(static_cast<long long>(2 * gen::uniform(rng, 1, 4)));
        std::sort(sizes.begin(), sizes.end());
        std::vector<Bandwidth> w(n);
        for (auto& x : w) x = gen::bandwidth(rng, 4);
        std::sort(w.begin(), w.end());
        PackStrategy ps = packcp(sizes, w);
        PackOracleResult opt = opt_packcp_assignment(sizes, w);
        bool recost = pack_cost(ps.steps, sizes, w) == ps.cost;
        bool range = opt.cost <= ps.cost && ps.cost <= opt.cost * Rational(4);
        if (opt.cost.square() > 0) worst = std::max(worst, std::sqrt((ps.cost.square() / opt.cost.square()).convert_to<double>()));
        if (recost && range) ++ok;
        else if (first.empty()) first = "instance " + std::to_string(i) + " dp=" + render(ps.cost) + " opt=" + render(opt.cost);
    }
    std::ostringstream msg;
    msg << ok << "/" << runs << " instances with DP in [1,4] x optimum and exact re-costing; worst ratio " << worst;
    if (!first.empty()) msg << "; first failure " << first;
    return {ok == runs, msg.str()};
}

// 12
Outcome split_optimizers() {
    std::size_t runs = 500, ok2 = 0, ok3 = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(12000 + i);
        std::size_t n = gen::uniform(rng, 1, 12);
        std::vector<Rational> f(n), g(n), h(n);
        for (std::size_t j = 0; j < n; ++j) {
            f[j] = Rational(static_cast<long long>(gen::uniform(rng, 0, 30)), static_cast<long long>(gen::uniform(rng, 1, 4)));
            g[j] = Rational(static_cast<long long>(gen::uniform(rng, 0, 30)), static_cast<long long>(gen::uniform(rng, 1, 4)));
            h[j] = Rational(static_cast<long long>(gen::uniform(rng, 0, 30)), static_cast<long long>(gen::uniform(rng, 1, 4)));
        }
        if (opt_split(f, g).value == brute_split(f, g).value) ++ok2;
        if (opt_split3(f, g, h).value == brute_split3(f, g, h).value) ++ok3;
    }
    return {ok2 == runs && ok3 == runs,
            "two-term " + std::to_string(ok2) + "/" + std::to_string(runs) + ", three-term " + std::to_string(ok3) + "/" +
                std::to_string(runs) + " equal to exhaustive minimum"};
}

// 13
Outcome mpc_reduction() {
    std::size_t runs = 20, ok = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        Rng rng(13000 + i);
        std::size_t p = gen::uniform(rng, 2, 10);
        std::vector<std::pair<Bandwidth, Bandwidth>> ud(p, {Bandwidth::infinite(), Bandwidth(1)});
        Topology t = build_star(ud);
        Distribution d = uniform_instance(t, gen::uniform(rng, 0, 200), gen::uniform(rng, 0, 200), rng());
        Simulation sim(t, d);
        sim.begin_round();
        const auto& lab = sim.labels();
        auto cs = t.compute_nodes();
        std::vector<std::uint64_t> received(t.node_count(), 0);
        Batch b;
        for (Relation rel : {Relation::R, Relation::S}) {
            const auto& owner = lab.owner(rel);
            for (std::size_t x = 0; x < owner.size(); ++x) {
                std::vector<NodeId> dests;
                for (NodeId v : cs)
                    if (v != owner[x] && gen::uniform(rng, 0, 3) == 0) dests.push_back(v);
                for (NodeId v : dests) ++received[v];
                b.add(owner[x], dests, rel, static_cast<Index>(x));
            }
        }
        b.flush(sim);
        auto [trace, state] = sim.take();
        std::uint64_t most = *std::max_element(received.begin(), received.end());
        if (cost(trace, t).tuple_cost == sz(most)) ++ok;
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " protocols cost exactly the max receive load"};
}

// 14
Outcome asym_constants() {
    std::size_t runs = 200;
    std::size_t ok[3] = {0, 0, 0};
    double worst[3] = {0, 0, 0};
    for (std::size_t i = 0; i < runs; ++i) {
        for (int variant = 0; variant < 3; ++variant) {
            Rng rng(14000 + 3 * i + variant);
            std::size_t p = gen::uniform(rng, 2, 10);
            Topology t = gen::asym_star(rng, p, 8, variant == 0, variant == 1);
            Distribution d = gen::counts(rng, t, gen::uniform(rng, 1, 300), gen::uniform(rng, 1, 300));
            AsymPlan plan = variant == 0 ? sf_plan(t, d) : variant == 1 ? rf_plan(t, d) : asym_plan(t, d);
            AsymVariant v = variant == 0 ? AsymVariant::SendingFree
                          : variant == 1 ? AsymVariant::ReceivingFree
                                         : AsymVariant::General;
            Magnitude lb = lb_asym_star(t, d, v).value;
            Magnitude c = Magnitude::of(plan.cost());
            if (c <= lb * Rational(4)) ++ok[variant];
            if (lb.square() > 0) worst[variant] = std::max(worst[variant], c.to_double() / lb.to_double());
        }
    }
    std::ostringstream msg;
    msg << "sending-free " << ok[0] << "/" << runs << " (worst " << worst[0] << "), receiving-free " << ok[1] << "/"
        << runs << " (worst " << worst[1] << "), general " << ok[2] << "/" << runs << " (worst " << worst[2] << ")";
    return {ok[0] == runs && ok[1] == runs && ok[2] == runs, msg.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 15
Outcome determinism() {
    std::vector<cli::ExperimentConfig> cfgs;
    auto add = [&](std::string task, std::string algo, std::string topo, std::string dist) {
        cli::ExperimentConfig c;
        c.task = std::move(task);
        c.algo = std::move(algo);
        c.topo = std::move(topo);
        c.dist = std::move(dist);
        c.seed = 42;
        c.trials = 3;
        cfgs.push_back(c);
    };
    add("intersect", "star", "star:1,2,3,4", "gen:uniform,r=300,s=500,space=600");
    add("cartesian", "general", "star:1,2,3,4", "gen:uniform,r=40,s=300");
    add("sort", "wts", "star:2,1,1,3,2", "gen:uniform,r=2000");
    add("join", "star", "star:1,1,2,4", "gen:zipf:1.2,n=1000");
    add("intersect", "asym", "star:1/2,3/1,2/2", "gen:uniform,r=100,s=200,space=250");
    std::size_t ok = 0;
    for (const auto& c : cfgs) {
        auto a = cli::run_experiment(c), b = cli::run_experiment(c);
        if (a.csv == b.csv && a.trace_csv == b.trace_csv) ++ok;
    }
    std::size_t bin_ok = 0, bin_runs = 0;
#ifdef TAMP_BIN
    for (int k = 0; k < 2; ++k) {
        ++bin_runs;
        std::string out1 = "determinism_a.csv", out2 = "determinism_b.csv";
        std::string base = std::string(TAMP_BIN) + " run --task join --topo star:1,2,2,3 --dist gen:zipf:1.1,n=800 --seed " +
                           std::to_string(7 + k) + " --trials 4 --out ";
        int r1 = std::system((base + out1).c_str());
        int r2 = std::system((base + out2).c_str());
        std::string x = slurp(out1), y = slurp(out2);
        if (r1 == 0 && r2 == 0 && !x.empty() && x == y) ++bin_ok;
        std::remove(out1.c_str());
        std::remove(out2.c_str());
    }
#endif
    return {ok == cfgs.size() && bin_ok == bin_runs,
            std::to_string(ok) + "/" + std::to_string(cfgs.size()) + " in-process configs and " + std::to_string(bin_ok) +
                "/" + std::to_string(bin_runs) + " binary reruns byte-identical"};
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"correctness of every protocol", correctness},
        {"lower-bound sandwich on tiny instances", sandwich},
        {"wHC receive and cost bounds", whc_bounds},
        {"square packing", packing},
        {"balanced partition", partitions},
        {"orientation structure", orientation},
        {"tree cartesian phase accounting", tree_cartesian_accounting},
        {"proportional allocation", proportional_properties},
        {"weighted TeraSort", wts},
        {"intersection ratio bounds", intersect_ratios},
        {"PackCP quality", packcp_quality},
        {"split optimisers", split_optimizers},
        {"MPC reduction", mpc_reduction},
        {"asymmetric-star constants", asym_constants},
        {"CLI determinism", determinism},
    };
    std::size_t failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("criterion %2zu %s: %s (%s) [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

#include "tamp/asymstar.hpp"

#include "tamp/star.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tamp {

namespace {

std::vector<std::size_t> order_by(const std::vector<Rational>& f) {
    std::vector<std::size_t> ord(f.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    return ord;
}

// Evaluates every prefix of the f-sorted order; objective(k) sees the prefix length.
template <class Objective>
SplitResult sweep(const std::vector<Rational>& f, Objective objective) {
    auto ord = order_by(f);
    std::size_t best_k = 0;
    Rational best = objective(ord, 0);
    for (std::size_t k = 1; k <= ord.size(); ++k) {
        Rational v = objective(ord, k);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    SplitResult res;
    res.chosen.assign(ord.begin(), ord.begin() + static_cast<std::ptrdiff_t>(best_k));
    std::sort(res.chosen.begin(), res.chosen.end());
    res.value = best;
    return res;
}

struct Suffix {
    std::vector<Rational> max_g, sum_h;
    Suffix(const std::vector<std::size_t>& ord, const std::vector<Rational>& g, const std::vector<Rational>* h) {
        std::size_t n = ord.size();
        max_g.assign(n + 1, 0);
        sum_h.assign(n + 1, 0);
        for (std::size_t k = n; k-- > 0;) {
            max_g[k] = std::max(max_g[k + 1], g[ord[k]]);
            sum_h[k] = sum_h[k + 1] + (h ? (*h)[ord[k]] : g[ord[k]]);
        }
    }
};

void check_sizes(std::size_t n, std::size_t m) {
    if (n != m) throw std::invalid_argument("split inputs differ in length");
}

std::vector<bool> membership(const std::vector<std::size_t>& x, std::size_t n) {
    std::vector<bool> in(n, false);
    for (auto i : x) in.at(i) = true;
    return in;
}

}  // namespace

SplitResult opt_split(const std::vector<Rational>& f, const std::vector<Rational>& g) {
    check_sizes(f.size(), g.size());
    auto ord = order_by(f);
    Suffix suf(ord, g, nullptr);
    return sweep(f, [&](const std::vector<std::size_t>& o, std::size_t k) {
        Rational head = k == 0 ? Rational(0) : f[o[k - 1]];
        return Rational(head + suf.sum_h[k]);
    });
}

SplitResult opt_split3(const std::vector<Rational>& f, const std::vector<Rational>& g, const std::vector<Rational>& h) {
    check_sizes(f.size(), g.size());
    check_sizes(f.size(), h.size());
    auto ord = order_by(f);
    Suffix suf(ord, g, &h);
    return sweep(f, [&](const std::vector<std::size_t>& o, std::size_t k) {
        Rational head = k == 0 ? Rational(0) : f[o[k - 1]];
        return Rational(head + suf.max_g[k] + suf.sum_h[k]);
    });
}

SplitResult opt_split_bottleneck(const std::vector<Rational>& f, const std::vector<Rational>& g,
                                 const std::vector<Rational>& h, const Rational& offset) {
    check_sizes(f.size(), g.size());
    check_sizes(f.size(), h.size());
    auto ord = order_by(f);
    Suffix suf(ord, g, &h);
    return sweep(f, [&](const std::vector<std::size_t>& o, std::size_t k) {
        Rational head = k == 0 ? Rational(0) : f[o[k - 1]];
        return std::max({head, suf.max_g[k], Rational(offset + suf.sum_h[k])});
    });
}

Rational split_objective(const std::vector<std::size_t>& x, const std::vector<Rational>& f,
                         const std::vector<Rational>& g) {
    auto in = membership(x, f.size());
    Rational head = 0, tail = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (in[i]) head = std::max(head, f[i]);
        else tail += g[i];
    }
    return head + tail;
}

Rational split3_objective(const std::vector<std::size_t>& x, const std::vector<Rational>& f,
                          const std::vector<Rational>& g, const std::vector<Rational>& h) {
    auto in = membership(x, f.size());
    Rational head = 0, mg = 0, tail = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (in[i]) {
            head = std::max(head, f[i]);
        } else {
            mg = std::max(mg, g[i]);
            tail += h[i];
        }
    }
    return head + mg + tail;
}

namespace {

template <class Eval>
SplitResult brute(std::size_t n, Eval eval) {
    if (n > 20) throw std::invalid_argument("exhaustive split limited to 20 elements");
    SplitResult best;
    bool first = true;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<std::size_t> x;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) x.push_back(i);
        Rational v = eval(x);
        if (first || v < best.value) {
            best.value = v;
            best.chosen = x;
            first = false;
        }
    }
    return best;
}

}  // namespace

SplitResult brute_split(const std::vector<Rational>& f, const std::vector<Rational>& g) {
    return brute(f.size(), [&](const std::vector<std::size_t>& x) { return split_objective(x, f, g); });
}

SplitResult brute_split3(const std::vector<Rational>& f, const std::vector<Rational>& g, const std::vector<Rational>& h) {
    return brute(f.size(), [&](const std::vector<std::size_t>& x) { return split3_objective(x, f, g, h); });
}

namespace {

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

std::vector<NodeId> pick(const StarView& sv, const std::vector<std::size_t>& pos) {
    std::vector<NodeId> out;
    for (auto i : pos) out.push_back(sv.nodes[i]);
    return out;
}

void choose(AsymPlan& p) {
    p.chosen = 1;
    for (int i = 2; i <= static_cast<int>(p.costs.size()); ++i)
        if (p.costs[i - 1] < p.costs[p.chosen - 1]) p.chosen = i;
}

// Strategy 1 of the sending-free and general algorithms.
std::pair<Rational, NodeId> converge_cost(const StarView& sv) {
    std::size_t n = sv.total();
    Rational best = 0;
    NodeId arg = sv.nodes.empty() ? 0 : sv.nodes[0];
    for (std::size_t v = 0; v < sv.size(); ++v) {
        Rational c = ratio(sz(n - sv.n(v)), sv.down[v]);
        for (std::size_t u = 0; u < sv.size(); ++u)
            if (u != v) c = std::max(c, ratio(sz(sv.n(u)), sv.up[u]));
        if (v == 0 || c < best) {
            best = c;
            arg = sv.nodes[v];
        }
    }
    return {best, arg};
}

}  // namespace

AsymPlan sf_plan(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    Bandwidth W = total(sv.down);
    std::size_t R = sv.r_total(), S = sv.s_total(), n = sv.size();
    AsymPlan p;
    auto [c1, target] = converge_cost(sv);
    p.target = target;
    p.costs.push_back(c1);

    std::vector<std::size_t> in1, in2;
    for (std::size_t v = 0; v < n; ++v)
        ((R - sv.r[v] > S - sv.s[v]) ? in1 : in2).push_back(v);

    std::vector<Rational> f, g;
    for (auto v : in1) {
        f.push_back(ratio(sz(S - sv.s[v]), sv.down[v]));
        g.push_back(ratio(sz(sv.r[v]), W));
    }
    SplitResult x1 = opt_split(f, g);
    Rational c2 = x1.value + ratio(sz(S), W);
    for (auto v : in2) c2 += ratio(sz(sv.r[v]), W);
    for (auto i : x1.chosen) p.v1.push_back(sv.nodes[in1[i]]);
    p.costs.push_back(c2);

    f.clear();
    g.clear();
    for (auto v : in2) {
        f.push_back(ratio(sz(R - sv.r[v]), sv.down[v]));
        g.push_back(ratio(sz(sv.s[v]), W));
    }
    SplitResult x2 = opt_split(f, g);
    Rational c3 = x2.value + ratio(sz(R), W);
    for (auto v : in1) c3 += ratio(sz(sv.s[v]), W);
    for (auto i : x2.chosen) p.v2.push_back(sv.nodes[in2[i]]);
    p.costs.push_back(c3);

    choose(p);
    return p;
}

AsymPlan rf_plan(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    AsymPlan p;
    Rational first = -1, second = 0, mr = 0, ms = 0;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        Rational a = ratio(sz(sv.n(v)), sv.up[v]);
        if (a > first) {
            second = std::max(first, Rational(0));
            first = a;
            p.target = sv.nodes[v];
        } else {
            second = std::max(second, a);
        }
        mr = std::max(mr, ratio(sz(sv.r[v]), sv.up[v]));
        ms = std::max(ms, ratio(sz(sv.s[v]), sv.up[v]));
    }
    p.costs = {second, mr, ms};
    p.v1 = sv.nodes;
    p.v2 = sv.nodes;
    choose(p);
    return p;
}

namespace {

// Strategy 2 of the general algorithm (strategy 3 is the same on swapped roles).
Rational general_broadcast_cost(const StarView& sv, const std::vector<std::size_t>& r, const std::vector<std::size_t>& s,
                                std::vector<NodeId>& chosen) {
    Bandwidth W = total(sv.down);
    std::size_t S = 0;
    for (auto x : s) S += x;
    std::vector<Rational> f, g, h;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        f.push_back(ratio(sz(S - s[v]), sv.down[v]));
        g.push_back(ratio(sz(r[v]), sv.up[v]));
        h.push_back(ratio(sz(r[v]), W));
    }
    SplitResult x = opt_split3(f, g, h);
    chosen = pick(sv, x.chosen);
    std::vector<bool> in(sv.size(), false);
    for (auto i : x.chosen) in[i] = true;
    Rational ms = 0, mr_out = 0, mf = 0;
    std::size_t rest = 0;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        ms = std::max(ms, ratio(sz(s[v]), sv.up[v]));
        if (in[v]) {
            mf = std::max(mf, f[v]);
        } else {
            mr_out = std::max(mr_out, g[v]);
            rest += r[v];
        }
    }
    return std::max(Rational(ms + mr_out), Rational(mf + ratio(sz(S + rest), W)));
}

}  // namespace

AsymPlan asym_plan(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    AsymPlan p;
    auto [c1, target] = converge_cost(sv);
    p.target = target;
    p.costs.push_back(c1);
    p.costs.push_back(general_broadcast_cost(sv, sv.r, sv.s, p.v1));
    p.costs.push_back(general_broadcast_cost(sv, sv.s, sv.r, p.v2));
    choose(p);
    return p;
}

namespace {

void broadcast(Simulation& sim, const StarView& sv, Relation rel) {
    Batch b;
    const auto& lab = sim.labels();
    const auto& own = lab.owner(rel);
    for (std::size_t i = 0; i < own.size(); ++i) b.add(own[i], sv.nodes, rel, static_cast<Index>(i));
    b.flush(sim);
}

// Relation `bcast` goes to `targets` and to its hash node; `hashed` tuples
// outside the targets go to their hash node.
void broadcast_and_hash(Simulation& sim, const std::vector<NodeId>& targets, Relation bcast, const HashFunction& h) {
    Relation other = bcast == Relation::R ? Relation::S : Relation::R;
    const auto& lab = sim.labels();
    Batch b;
    const auto& bown = lab.owner(bcast);
    const auto& bkeys = lab.keys(bcast);
    for (std::size_t i = 0; i < bown.size(); ++i) {
        auto dests = targets;
        dests.push_back(h(bkeys[i]));
        b.add(bown[i], dests, bcast, static_cast<Index>(i));
    }
    const auto& oown = lab.owner(other);
    const auto& okeys = lab.keys(other);
    for (std::size_t i = 0; i < oown.size(); ++i) {
        if (std::binary_search(targets.begin(), targets.end(), oown[i])) continue;
        b.add(oown[i], {h(okeys[i])}, other, static_cast<Index>(i));
    }
    b.flush(sim);
}

AsymRun execute(const Topology& t, const Distribution& d, AsymPlan plan, const std::vector<Bandwidth>& hash_w,
                bool rf, std::uint64_t seed) {
    StarView sv = star_view(t, d);
    Simulation sim(t, d);
    sim.begin_round();
    if (plan.chosen == 1) {
        converge(sim, plan.target);
    } else if (rf) {
        broadcast(sim, sv, plan.chosen == 2 ? Relation::R : Relation::S);
    } else {
        HashFunction h = make_hash(seed, 0, proportional_probs(sv.nodes, hash_w));
        if (plan.chosen == 2) broadcast_and_hash(sim, plan.v1, Relation::S, h);
        else broadcast_and_hash(sim, plan.v2, Relation::R, h);
    }
    auto [trace, state] = sim.take();
    return {std::move(trace), std::move(state), std::move(plan)};
}

void require_infinite(const std::vector<Bandwidth>& ws, const char* what) {
    for (const auto& w : ws)
        if (!w.is_infinite()) throw std::invalid_argument(what);
}

}  // namespace

AsymRun sf_star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed) {
    StarView sv = star_view(t, d);
    require_infinite(sv.up, "sending-free star needs infinite uplinks");
    return execute(t, d, sf_plan(t, d), sv.down, false, seed);
}

AsymRun rf_star_intersect(const Topology& t, const Distribution& d) {
    StarView sv = star_view(t, d);
    require_infinite(sv.down, "receiving-free star needs infinite downlinks");
    return execute(t, d, rf_plan(t, d), sv.down, true, 0);
}

AsymRun asym_star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed) {
    StarView sv = star_view(t, d);
    return execute(t, d, asym_plan(t, d), sv.down, false, seed);
}

}  // namespace tamp

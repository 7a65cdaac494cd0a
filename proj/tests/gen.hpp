#pragma once

#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace tamp::gen {

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Bandwidth bandwidth(Rng& rng, std::size_t max_bw, unsigned inf_percent = 0) {
    if (inf_percent > 0 && uniform(rng, 1, 100) <= inf_percent) return Bandwidth::infinite();
    return Bandwidth(Rational(static_cast<long long>(uniform(rng, 1, max_bw)), static_cast<long long>(uniform(rng, 1, 2))));
}

// Router o with routers a, b; a holds v1, v2 and b holds v3, v4.
inline Topology tree4(const std::vector<Bandwidth>& w = {1, 1, 1, 1, 1, 1}) {
    Topology t;
    NodeId o = t.add_node("o", NodeKind::Router);
    NodeId a = t.add_node("a", NodeKind::Router);
    NodeId b = t.add_node("b", NodeKind::Router);
    NodeId v1 = t.add_node("v1", NodeKind::Compute);
    NodeId v2 = t.add_node("v2", NodeKind::Compute);
    NodeId v3 = t.add_node("v3", NodeKind::Compute);
    NodeId v4 = t.add_node("v4", NodeKind::Compute);
    t.add_link(a, o, w[0]);
    t.add_link(b, o, w[1]);
    t.add_link(v1, a, w[2]);
    t.add_link(v2, a, w[3]);
    t.add_link(v3, b, w[4]);
    t.add_link(v4, b, w[5]);
    t.set_symmetric(true);
    return t;
}

inline Topology star(Rng& rng, std::size_t leaves, std::size_t max_bw, unsigned inf_percent = 0) {
    std::vector<Bandwidth> w;
    for (std::size_t i = 0; i < leaves; ++i) w.push_back(bandwidth(rng, max_bw, inf_percent));
    return build_symmetric_star(w);
}

inline Topology asym_star(Rng& rng, std::size_t leaves, std::size_t max_bw, bool inf_up, bool inf_down) {
    std::vector<std::pair<Bandwidth, Bandwidth>> ud;
    for (std::size_t i = 0; i < leaves; ++i)
        ud.emplace_back(inf_up ? Bandwidth::infinite() : bandwidth(rng, max_bw),
                        inf_down ? Bandwidth::infinite() : bandwidth(rng, max_bw));
    return build_star(ud);
}

// Normalized symmetric tree with the given number of compute leaves (>= 2).
inline Topology tree(Rng& rng, std::size_t compute, std::size_t max_bw, unsigned inf_percent = 0) {
    Topology t;
    std::vector<NodeId> routers{t.add_node("r0", NodeKind::Router)};
    std::size_t extra = uniform(rng, 0, compute - 1);
    for (std::size_t i = 0; i < extra; ++i) {
        NodeId p = routers[uniform(rng, 0, routers.size() - 1)];
        NodeId r = t.add_node("r" + std::to_string(routers.size()), NodeKind::Router);
        t.add_link(r, p, bandwidth(rng, max_bw, inf_percent));
        routers.push_back(r);
    }
    for (std::size_t i = 0; i < compute; ++i) {
        NodeId p = routers[uniform(rng, 0, routers.size() - 1)];
        NodeId v = t.add_node("v" + std::to_string(i + 1), NodeKind::Compute);
        t.add_link(v, p, bandwidth(rng, max_bw, inf_percent));
    }
    t.set_symmetric(true);
    return normalize_tree(t);
}

// Random per-node counts, at most max_total tuples per relation, distinct keys.
inline Distribution counts(Rng& rng, const Topology& t, std::size_t max_r, std::size_t max_s,
                           std::optional<Key> space = std::nullopt) {
    auto cs = t.compute_nodes();
    std::vector<std::size_t> rc(cs.size()), sc(cs.size());
    std::size_t skew = uniform(rng, 0, 2);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        std::size_t cap_r = max_r / cs.size(), cap_s = max_s / cs.size();
        if (skew == 1 && i == 0) cap_r = max_r / 2, cap_s = max_s / 2;
        rc[i] = uniform(rng, 0, std::max<std::size_t>(cap_r, 1));
        sc[i] = uniform(rng, 0, std::max<std::size_t>(cap_s, 1));
    }
    return counts_instance(t, rc, sc, rng(), space);
}

// Keys shared between R and S: every R key appears once in S, at a node other than its R holder when possible.
inline Distribution matched(Rng& rng, const Topology& t, std::size_t n) {
    auto cs = t.compute_nodes();
    Distribution d = Distribution::empty(t);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t a = uniform(rng, 0, cs.size() - 1), b = uniform(rng, 0, cs.size() - 1);
        if (cs.size() > 1 && a == b) b = (a + 1) % cs.size();
        d.r[cs[a]].push_back(static_cast<Key>(k + 1));
        d.s[cs[b]].push_back(static_cast<Key>(k + 1));
    }
    return d;
}

// |R| = |S| = n with random placement.
inline Distribution balanced(Rng& rng, const Topology& t, std::size_t n) {
    return uniform_instance(t, n, n, rng());
}

}  // namespace tamp::gen

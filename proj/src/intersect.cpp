#include "tamp/intersect.hpp"

#include "tamp/star.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace tamp {

namespace {

UEdge ukey(NodeId u, NodeId v) { return u < v ? UEdge{u, v} : UEdge{v, u}; }

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

Relation small_relation(const Distribution& d) { return d.r_total() <= d.s_total() ? Relation::R : Relation::S; }
Relation other(Relation r) { return r == Relation::R ? Relation::S : Relation::R; }

std::size_t small_size(const Distribution& d) { return std::min(d.r_total(), d.s_total()); }

std::pair<Rational, Rational> sides(const Topology& t, const TreeIndex& idx, const std::vector<Rational>& sizes,
                                    const UEdge& e) {
    return idx.side_sums(t.edge_between(e.first, e.second), sizes);
}

}  // namespace

bool EdgeClasses::is_alpha(NodeId u, NodeId v) const {
    return std::binary_search(alpha.begin(), alpha.end(), ukey(u, v));
}

bool EdgeClasses::is_beta(NodeId u, NodeId v) const {
    return std::binary_search(beta.begin(), beta.end(), ukey(u, v));
}

EdgeClasses classify_edges(const Topology& t, const Distribution& d) {
    if (!t.skeleton_is_tree()) throw std::invalid_argument("topology skeleton is not a tree");
    TreeIndex idx(t);
    auto sizes = d.sizes();
    Rational r = sz(small_size(d));
    EdgeClasses ec;
    for (const auto& e : skeleton_edges(t)) {
        auto [a, b] = sides(t, idx, sizes, e);
        (std::min(a, b) < r ? ec.alpha : ec.beta).push_back(e);
    }
    return ec;
}

std::vector<UEdge> steiner_edges(const TreeIndex& idx, const std::vector<NodeId>& nodes) {
    if (nodes.size() < 2) return {};
    const Topology& t = idx.topology();
    std::vector<NodeId> rest(nodes.begin() + 1, nodes.end());
    std::set<UEdge> out;
    for (EdgeId e : idx.multicast(nodes[0], rest)) out.insert(ukey(t.edge(e).from, t.edge(e).to));
    return {out.begin(), out.end()};
}

Partition balanced_partition(const Topology& t, const Distribution& d) {
    EdgeClasses ec = classify_edges(t, d);
    TreeIndex idx(t);
    Partition p;
    auto compute = t.compute_nodes();
    Rational r = sz(small_size(d));
    auto finish = [&](std::vector<std::vector<NodeId>> blocks) {
        for (auto& b : blocks) {
            if (b.empty()) continue;
            std::sort(b.begin(), b.end());
            p.blocks.push_back(b);
        }
        std::sort(p.blocks.begin(), p.blocks.end());
        for (const auto& b : p.blocks) p.spanning.push_back(steiner_edges(idx, b));
        return p;
    };
    if (ec.beta.empty()) return finish({compute});

    std::size_t n = t.node_count();
    std::vector<std::vector<NodeId>> adj_a(n), adj_b(n);
    for (const auto& [u, v] : ec.alpha) {
        adj_a[u].push_back(v);
        adj_a[v].push_back(u);
    }
    for (const auto& [u, v] : ec.beta) {
        adj_b[u].push_back(v);
        adj_b[v].push_back(u);
    }
    // Gamma: compute nodes alpha-connected to each G_beta vertex.
    std::vector<std::vector<NodeId>> gamma(n);
    std::vector<Rational> w(n, 0);
    for (NodeId x = 0; x < n; ++x) {
        if (adj_b[x].empty()) continue;
        std::vector<NodeId> stack{x};
        std::vector<bool> seen(n, false);
        seen[x] = true;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            if (t.is_compute(u)) {
                gamma[x].push_back(u);
                w[x] += sz(d.n(u));
            }
            for (NodeId v : adj_a[u])
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
    }
    std::vector<std::size_t> deg(n);
    std::vector<bool> alive(n, false);
    std::size_t remaining = 0;
    for (NodeId x = 0; x < n; ++x) {
        deg[x] = adj_b[x].size();
        if (deg[x] > 0) {
            alive[x] = true;
            ++remaining;
        }
    }
    using Item = std::pair<Rational, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (NodeId x = 0; x < n; ++x)
        if (alive[x] && deg[x] <= 1) pq.push({w[x], x});
    std::vector<std::vector<NodeId>> blocks;
    while (remaining > 0) {
        if (pq.empty()) throw std::logic_error("balanced partition: no leaf available");
        auto [wx, x] = pq.top();
        pq.pop();
        ++p.visits;
        if (!alive[x] || wx != w[x] || deg[x] > 1) continue;
        alive[x] = false;
        --remaining;
        if (deg[x] == 0) {
            // last vertex of G_beta
            if (w[x] >= r || blocks.empty()) blocks.push_back(gamma[x]);
            else blocks.back().insert(blocks.back().end(), gamma[x].begin(), gamma[x].end());
            continue;
        }
        NodeId y = 0;
        for (NodeId v : adj_b[x])
            if (alive[v]) y = v;
        if (w[x] >= r) {
            blocks.push_back(gamma[x]);
        } else {
            gamma[y].insert(gamma[y].end(), gamma[x].begin(), gamma[x].end());
            w[y] += w[x];
        }
        --deg[y];
        deg[x] = 0;
        if (deg[y] <= 1) pq.push({w[y], y});
    }
    return finish(std::move(blocks));
}

Verdict check_balanced_partition(const Topology& t, const Distribution& d, const Partition& p) {
    Verdict v;
    auto fail = [&](const std::string& why) {
        v.ok = false;
        if (v.witness.empty()) v.witness = why;
    };
    EdgeClasses ec = classify_edges(t, d);
    TreeIndex idx(t);
    auto sizes = d.sizes();
    Rational r = sz(small_size(d));
    std::map<NodeId, std::size_t> block_of;
    for (std::size_t i = 0; i < p.blocks.size(); ++i)
        for (NodeId u : p.blocks[i])
            if (!block_of.emplace(u, i).second) fail("node " + t.name(u) + " in two blocks");
    for (NodeId u : t.compute_nodes())
        if (!block_of.count(u)) fail("node " + t.name(u) + " in no block");
    if (!v.ok) return v;

    // (1) alpha-connected compute nodes share a block
    std::vector<NodeId> comp(t.node_count());
    for (NodeId u = 0; u < t.node_count(); ++u) comp[u] = u;
    std::function<NodeId(NodeId)> find = [&](NodeId x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
    for (const auto& [a, b] : ec.alpha) comp[find(a)] = find(b);
    std::map<NodeId, std::size_t> comp_block;
    for (NodeId u : t.compute_nodes()) {
        auto [it, fresh] = comp_block.emplace(find(u), block_of[u]);
        if (!fresh && it->second != block_of[u]) fail("property 1: alpha-connected nodes split at " + t.name(u));
    }
    // (2) each edge in at most one spanning tree
    std::map<UEdge, std::size_t> used;
    for (const auto& st : p.spanning)
        for (const auto& e : st)
            if (++used[e] > 1) fail("property 2: edge shared by two blocks");
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        // (3) block weight
        Rational wsum = 0;
        for (NodeId u : p.blocks[i]) wsum += sizes[u];
        if (wsum < r) fail("property 3: light block");
        // (4) beta edges inside the block's spanning tree
        std::vector<Rational> restricted(t.node_count(), 0);
        for (NodeId u : p.blocks[i]) restricted[u] = sizes[u];
        for (const auto& e : p.spanning[i]) {
            if (!ec.is_beta(e.first, e.second)) continue;
            auto [a, b] = sides(t, idx, restricted, e);
            if (std::min(a, b) > r) fail("property 4: heavy beta edge in block");
        }
    }
    return v;
}

IntersectRun star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed) {
    StarView sv = star_view(t, d);
    Relation rs = small_relation(d), ls = other(rs);
    const auto& small = rs == Relation::R ? sv.r : sv.s;
    const auto& large = rs == Relation::R ? sv.s : sv.r;
    std::size_t R = small_size(d), N = sv.total();
    Simulation sim(t, d);
    sim.begin_round();
    IntersectRun run;
    std::vector<NodeId> beta;
    std::vector<bool> in_alpha(sv.size());
    std::size_t n2 = R;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        in_alpha[v] = std::min(sv.n(v), N - sv.n(v)) < R;
        if (in_alpha[v]) n2 += large[v];
        else beta.push_back(sv.nodes[v]);
    }
    if (R > 0) {
        std::vector<std::pair<NodeId, Rational>> probs;
        for (std::size_t v = 0; v < sv.size(); ++v)
            probs.emplace_back(sv.nodes[v], sz(in_alpha[v] ? sv.n(v) : small[v]) / sz(n2));
        HashFunction h = make_hash(seed, 0, probs);
        const auto& lab = sim.labels();
        Batch b;
        const auto& sk = lab.keys(rs);
        const auto& so = lab.owner(rs);
        for (std::size_t i = 0; i < sk.size(); ++i) {
            auto dests = beta;
            dests.push_back(h(sk[i]));
            b.add(so[i], dests, rs, static_cast<Index>(i));
        }
        const auto& lk = lab.keys(ls);
        const auto& lo = lab.owner(ls);
        for (std::size_t i = 0; i < lk.size(); ++i)
            if (in_alpha[sv.position(lo[i])]) b.add(lo[i], {h(lk[i])}, ls, static_cast<Index>(i));
        b.flush(sim);
    }
    run.partition.blocks = {sv.nodes};
    std::tie(run.trace, run.state) = sim.take();
    return run;
}

IntersectRun tree_intersect(const Topology& t, const Distribution& d, std::uint64_t seed) {
    IntersectRun run;
    run.partition = balanced_partition(t, d);
    Relation rs = small_relation(d), ls = other(rs);
    Simulation sim(t, d);
    sim.begin_round();
    std::vector<std::optional<HashFunction>> hashes;
    std::map<NodeId, std::size_t> block_of;
    for (std::size_t i = 0; i < run.partition.blocks.size(); ++i) {
        const auto& blk = run.partition.blocks[i];
        std::size_t total = 0;
        for (NodeId u : blk) {
            total += d.n(u);
            block_of[u] = i;
        }
        if (total == 0) {
            hashes.emplace_back();
            continue;
        }
        std::vector<std::pair<NodeId, Rational>> probs;
        for (NodeId u : blk) probs.emplace_back(u, sz(d.n(u)) / sz(total));
        hashes.emplace_back(make_hash(seed, i, probs));
    }
    if (small_size(d) > 0) {
        const auto& lab = sim.labels();
        Batch b;
        const auto& sk = lab.keys(rs);
        const auto& so = lab.owner(rs);
        for (std::size_t i = 0; i < sk.size(); ++i) {
            std::vector<NodeId> dests;
            for (const auto& h : hashes)
                if (h) dests.push_back((*h)(sk[i]));
            b.add(so[i], dests, rs, static_cast<Index>(i));
        }
        const auto& lk = lab.keys(ls);
        const auto& lo = lab.owner(ls);
        for (std::size_t i = 0; i < lk.size(); ++i) {
            const auto& h = hashes[block_of.at(lo[i])];
            b.add(lo[i], {(*h)(lk[i])}, ls, static_cast<Index>(i));
        }
        b.flush(sim);
    }
    std::tie(run.trace, run.state) = sim.take();
    return run;
}

}  // namespace tamp

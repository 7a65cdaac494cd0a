#include "tamp/topology.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>

namespace tamp {

namespace {
constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();
}

NodeId Topology::add_node(std::string name, NodeKind kind) {
    if (by_name_.count(name)) throw TopologyError("duplicate node id: " + name);
    NodeId id = static_cast<NodeId>(nodes_.size());
    by_name_[name] = id;
    nodes_.push_back({std::move(name), kind});
    return id;
}

EdgeId Topology::add_edge(NodeId from, NodeId to, Bandwidth bw) {
    if (from >= nodes_.size() || to >= nodes_.size()) throw TopologyError("edge references unknown node");
    if (from == to) throw TopologyError("self loop at " + nodes_[from].name);
    if (!bw.is_infinite() && bw.value() <= 0) throw TopologyError("bandwidth must be positive");
    auto key = std::make_pair(from, to);
    if (index_.count(key)) throw TopologyError("duplicate edge " + nodes_[from].name + "->" + nodes_[to].name);
    EdgeId id = static_cast<EdgeId>(edges_.size());
    index_[key] = id;
    edges_.push_back({from, to, bw});
    return id;
}

void Topology::add_link(NodeId u, NodeId v, Bandwidth bw) {
    add_edge(u, v, bw);
    add_edge(v, u, bw);
}

std::vector<NodeId> Topology::compute_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < nodes_.size(); ++v)
        if (nodes_[v].kind == NodeKind::Compute) out.push_back(v);
    return out;
}

std::optional<NodeId> Topology::find_node(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

NodeId Topology::node_by_name(const std::string& name) const {
    auto v = find_node(name);
    if (!v) throw TopologyError("unknown node: " + name);
    return *v;
}

std::optional<EdgeId> Topology::find_edge(NodeId from, NodeId to) const {
    auto it = index_.find({from, to});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EdgeId Topology::edge_between(NodeId from, NodeId to) const {
    auto e = find_edge(from, to);
    if (!e) throw TopologyError("no edge " + name(from) + "->" + name(to));
    return *e;
}

bool Topology::check_symmetric() const {
    for (const auto& e : edges_) {
        auto r = find_edge(e.to, e.from);
        if (!r || !(edges_[*r].bw == e.bw)) return false;
    }
    return true;
}

std::vector<NodeId> Topology::neighbors(NodeId v) const {
    std::set<NodeId> out;
    for (const auto& e : edges_) {
        if (e.from == v) out.insert(e.to);
        if (e.to == v) out.insert(e.from);
    }
    return {out.begin(), out.end()};
}

bool Topology::skeleton_is_tree() const {
    if (nodes_.empty()) return false;
    auto links = skeleton_edges(*this);
    if (links.size() + 1 != nodes_.size()) return false;
    std::vector<std::vector<NodeId>> adj(nodes_.size());
    for (auto [u, v] : links) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId w : adj[u])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == nodes_.size();
}

bool Topology::compute_nodes_connected() const {
    std::vector<std::vector<NodeId>> out(nodes_.size());
    for (const auto& e : edges_) out[e.from].push_back(e.to);
    auto cs = compute_nodes();
    for (NodeId s : cs) {
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<NodeId> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (NodeId w : out[u])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        for (NodeId d : cs)
            if (!seen[d]) return false;
    }
    return true;
}

Topology Topology::with_bandwidths_scaled(const Rational& c) const {
    Topology t = *this;
    for (auto& e : t.edges_) e.bw = scale(e.bw, c);
    return t;
}

Topology build_star(const std::vector<std::pair<Bandwidth, Bandwidth>>& up_down) {
    if (up_down.empty()) throw TopologyError("star needs at least one compute node");
    Topology t;
    NodeId o = t.add_node("o", NodeKind::Router);
    bool sym = true;
    for (std::size_t i = 0; i < up_down.size(); ++i) {
        NodeId v = t.add_node("v" + std::to_string(i + 1), NodeKind::Compute);
        t.add_edge(v, o, up_down[i].first);
        t.add_edge(o, v, up_down[i].second);
        if (!(up_down[i].first == up_down[i].second)) sym = false;
    }
    t.set_symmetric(sym);
    return t;
}

Topology build_symmetric_star(const std::vector<Bandwidth>& w) {
    std::vector<std::pair<Bandwidth, Bandwidth>> ud;
    for (const auto& x : w) ud.emplace_back(x, x);
    return build_star(ud);
}

std::vector<std::pair<NodeId, NodeId>> skeleton_edges(const Topology& t) {
    std::set<std::pair<NodeId, NodeId>> s;
    for (const auto& e : t.edges()) s.insert({std::min(e.from, e.to), std::max(e.from, e.to)});
    return {s.begin(), s.end()};
}

bool is_normalized_tree(const Topology& t) {
    if (!t.skeleton_is_tree()) return false;
    if (t.node_count() == 1) return true;
    for (NodeId v = 0; v < t.node_count(); ++v) {
        auto d = t.degree(v);
        if (t.is_compute(v) && d != 1) return false;
        if (t.is_compute(v)) continue;
        auto nb = t.neighbors(v);
        bool two_leaf_star = d == 2 && t.is_compute(nb[0]) && t.is_compute(nb[1]);
        if (d < 3 && !two_leaf_star) return false;
    }
    return true;
}

Topology normalize_tree(const Topology& t, NormalizeReport* report) {
    if (!t.check_symmetric()) throw TopologyError("normalize_tree requires a symmetric topology");
    if (!t.skeleton_is_tree()) throw TopologyError("topology skeleton is not a tree (cyclic or disconnected)");

    NormalizeReport local;
    NormalizeReport& rep = report ? *report : local;
    for (NodeId v : t.compute_nodes()) rep.alias[t.name(v)] = t.name(v);
    if (is_normalized_tree(t)) {
        Topology out = t;
        out.set_symmetric(true);
        return out;
    }

    std::vector<Node> nodes = t.nodes();
    std::vector<char> alive(nodes.size(), 1);
    std::vector<std::map<NodeId, Bandwidth>> adj(nodes.size());
    for (const auto& e : t.edges()) adj[e.from][e.to] = e.bw;

    std::set<std::string> names;
    for (const auto& n : nodes) names.insert(n.name);
    std::size_t original = nodes.size();
    for (NodeId v = 0; v < original; ++v) {
        if (nodes[v].kind != NodeKind::Compute || adj[v].size() < 2) continue;
        std::string leaf = nodes[v].name + "'";
        while (names.count(leaf)) leaf += "'";
        names.insert(leaf);
        NodeId id = static_cast<NodeId>(nodes.size());
        nodes.push_back({leaf, NodeKind::Compute});
        alive.push_back(1);
        adj.emplace_back();
        nodes[v].kind = NodeKind::Router;
        adj[v][id] = Bandwidth::infinite();
        adj[id][v] = Bandwidth::infinite();
        rep.leafed.push_back(nodes[v].name);
        rep.alias[nodes[v].name] = leaf;
    }

    std::size_t live = nodes.size();
    for (bool changed = true; changed;) {
        changed = false;
        for (NodeId v = 0; v < nodes.size(); ++v) {
            if (!alive[v] || nodes[v].kind != NodeKind::Router || live == 1) continue;
            if (adj[v].size() <= 1) {
                for (auto& [w, bw] : adj[v]) adj[w].erase(v);
                adj[v].clear();
                alive[v] = 0;
                --live;
                rep.pruned.push_back(nodes[v].name);
                changed = true;
            } else if (adj[v].size() == 2) {
                auto it = adj[v].begin();
                NodeId a = it->first;
                Bandwidth wa = it->second;
                ++it;
                NodeId b = it->first;
                Bandwidth wb = it->second;
                if (nodes[a].kind == NodeKind::Compute && nodes[b].kind == NodeKind::Compute) continue;
                adj[a].erase(v);
                adj[b].erase(v);
                adj[v].clear();
                Bandwidth w = min(wa, wb);
                adj[a][b] = w;
                adj[b][a] = w;
                alive[v] = 0;
                --live;
                rep.fused.push_back(nodes[v].name);
                changed = true;
            }
        }
    }

    Topology out;
    std::vector<NodeId> remap(nodes.size(), 0);
    for (NodeId v = 0; v < nodes.size(); ++v)
        if (alive[v]) remap[v] = out.add_node(nodes[v].name, nodes[v].kind);
    std::vector<std::tuple<NodeId, NodeId, Bandwidth>> links;
    for (NodeId u = 0; u < nodes.size(); ++u) {
        if (!alive[u]) continue;
        for (auto& [w, bw] : adj[u])
            if (remap[u] < remap[w]) links.emplace_back(remap[u], remap[w], bw);
    }
    std::sort(links.begin(), links.end(),
              [](const auto& x, const auto& y) { return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y)); });
    for (auto& [u, w, bw] : links) out.add_link(u, w, bw);
    out.set_symmetric(true);
    return out;
}

TreeIndex::TreeIndex(const Topology& t, NodeId root) : t_(&t), root_(root) {
    if (!t.skeleton_is_tree()) throw TopologyError("TreeIndex requires a tree skeleton");
    std::size_t n = t.node_count();
    parent_.assign(n, root);
    depth_.assign(n, 0);
    children_.assign(n, {});
    tin_.assign(n, 0);
    tout_.assign(n, 0);
    up_.assign(n, kNoEdge);
    down_.assign(n, kNoEdge);
    std::vector<std::vector<NodeId>> adj(n);
    for (auto [u, v] : skeleton_edges(t)) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    std::size_t clock = 0;
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    std::vector<char> seen(n, 0);
    seen[root] = 1;
    tin_[root] = clock++;
    order_.push_back(root);
    while (!stack.empty()) {
        auto& [u, i] = stack.back();
        if (i < adj[u].size()) {
            NodeId w = adj[u][i++];
            if (seen[w]) continue;
            seen[w] = 1;
            parent_[w] = u;
            depth_[w] = depth_[u] + 1;
            children_[u].push_back(w);
            if (auto e = t.find_edge(w, u)) up_[w] = *e;
            if (auto e = t.find_edge(u, w)) down_[w] = *e;
            tin_[w] = clock++;
            order_.push_back(w);
            stack.push_back({w, 0});
        } else {
            tout_[u] = clock++;
            stack.pop_back();
        }
    }
}

std::optional<NodeId> TreeIndex::parent(NodeId v) const {
    if (v == root_) return std::nullopt;
    return parent_[v];
}

std::vector<EdgeId> TreeIndex::path(NodeId u, NodeId v) const {
    std::vector<EdgeId> head, tail;
    while (u != v) {
        if (depth_[u] >= depth_[v]) {
            if (up_[u] == kNoEdge) throw TopologyError("missing upward edge at " + t_->name(u));
            head.push_back(up_[u]);
            u = parent_[u];
        } else {
            if (down_[v] == kNoEdge) throw TopologyError("missing downward edge at " + t_->name(v));
            tail.push_back(down_[v]);
            v = parent_[v];
        }
    }
    head.insert(head.end(), tail.rbegin(), tail.rend());
    return head;
}

std::vector<EdgeId> TreeIndex::multicast(NodeId src, const std::vector<NodeId>& dests) const {
    std::vector<EdgeId> out;
    for (NodeId d : dests)
        for (EdgeId e : path(src, d)) out.push_back(e);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

NodeId TreeIndex::lower_endpoint(EdgeId e) const {
    const Edge& ed = t_->edge(e);
    if (ed.from != root_ && parent_[ed.from] == ed.to) return ed.from;
    if (ed.to != root_ && parent_[ed.to] == ed.from) return ed.to;
    throw TopologyError("edge not in tree");
}

std::vector<Rational> TreeIndex::subtree_sums(const std::vector<Rational>& per_node) const {
    std::vector<Rational> s(per_node.begin(), per_node.end());
    s.resize(t_->node_count());
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
        if (*it != root_) s[parent_[*it]] += s[*it];
    return s;
}

std::pair<Rational, Rational> TreeIndex::side_sums(EdgeId e, const std::vector<Rational>& per_node) const {
    auto s = subtree_sums(per_node);
    NodeId low = lower_endpoint(e);
    Rational below = s[low], above = s[root_] - s[low];
    if (t_->edge(e).from == low) return {below, above};
    return {above, below};
}

EdgeCut edge_cut(const Topology& t, EdgeId e) {
    if (e >= t.edge_count()) throw TopologyError("edge not in topology");
    TreeIndex ix(t, t.edge(e).from);
    NodeId head = t.edge(e).to;
    EdgeCut cut;
    cut.edge = e;
    for (NodeId v : t.compute_nodes()) (ix.in_subtree(v, head) ? cut.plus : cut.minus).push_back(v);
    return cut;
}

std::vector<EdgeId> unique_path(const Topology& t, NodeId u, NodeId v) {
    if (u >= t.node_count() || v >= t.node_count()) throw TopologyError("unknown node");
    TreeIndex ix(t, 0);
    return ix.path(u, v);
}

std::vector<NodeId> OrientedTree::postorder() const {
    std::vector<NodeId> out;
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [u, i] = stack.back();
        if (i < children[u].size()) {
            NodeId c = children[u][i++];
            stack.push_back({c, 0});
        } else {
            out.push_back(u);
            stack.pop_back();
        }
    }
    return out;
}

std::vector<NodeId> OrientedTree::preorder() const {
    std::vector<NodeId> out, stack{root};
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        out.push_back(u);
        for (auto it = children[u].rbegin(); it != children[u].rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<NodeId> OrientedTree::leaves_under(NodeId v) const {
    std::vector<NodeId> out, stack{v};
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        if (children[u].empty()) out.push_back(u);
        for (NodeId c : children[u]) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

OrientedTree orient(const Topology& t, const std::vector<Rational>& sizes) {
    std::size_t n = t.node_count();
    TreeIndex ix(t, 0);
    std::vector<Rational> per(sizes.begin(), sizes.end());
    per.resize(n);
    auto sums = ix.subtree_sums(per);
    Rational total = sums[0];
    if (total <= 0) throw TopologyError("orient requires positive total size");
    std::vector<Rational> ones(n, Rational(1));
    auto counts = ix.subtree_sums(ones);
    NodeId top_id = static_cast<NodeId>(n - 1);

    OrientedTree ot;
    ot.parent.assign(n, std::nullopt);
    ot.children.assign(n, {});
    auto point = [&](NodeId from, NodeId to) {
        if (ot.parent[from]) throw TopologyError("orientation produced out-degree 2 at " + t.name(from));
        ot.parent[from] = to;
    };
    for (NodeId v : ix.preorder()) {
        if (v == ix.root()) continue;
        NodeId p = *ix.parent(v);
        Rational below = sums[v], above = total - sums[v];
        bool up;
        if (below != above) {
            up = below < above;
        } else if (counts[v] != Rational(n) - counts[v]) {
            up = counts[v] < Rational(n) - counts[v];
        } else {
            up = !ix.in_subtree(top_id, v);
        }
        if (up) point(v, p);
        else point(p, v);
    }
    std::vector<NodeId> roots;
    for (NodeId v = 0; v < n; ++v) {
        if (ot.parent[v]) ot.children[*ot.parent[v]].push_back(v);
        else roots.push_back(v);
    }
    if (roots.size() != 1) throw TopologyError("orientation does not have a unique root");
    ot.root = roots[0];
    for (auto& c : ot.children) std::sort(c.begin(), c.end());
    return ot;
}

bool is_cover(const OrientedTree& ot, const Cover& c) {
    std::vector<char> in(ot.parent.size(), 0);
    for (NodeId v : c) in[v] = 1;
    for (NodeId v = 0; v < ot.parent.size(); ++v) {
        if (!ot.is_leaf(v)) continue;
        bool ok = false;
        for (std::optional<NodeId> u = v; u; u = ot.parent[*u])
            if (in[*u]) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

std::vector<Cover> enumerate_minimal_covers(const OrientedTree& ot, std::size_t guard) {
    if (ot.parent.size() > guard) throw TopologyError("minimal cover enumeration guard exceeded");
    std::function<std::vector<Cover>(NodeId)> rec = [&](NodeId u) {
        std::vector<Cover> out{{u}};
        if (ot.children[u].empty()) return out;
        std::vector<Cover> acc{{}};
        for (NodeId c : ot.children[u]) {
            auto sub = rec(c);
            std::vector<Cover> next;
            for (const auto& a : acc)
                for (const auto& b : sub) {
                    Cover m = a;
                    m.insert(m.end(), b.begin(), b.end());
                    next.push_back(std::move(m));
                }
            acc = std::move(next);
        }
        for (auto& m : acc) {
            std::sort(m.begin(), m.end());
            out.push_back(std::move(m));
        }
        return out;
    };
    auto all = rec(ot.root);
    std::sort(all.begin(), all.end(), [](const Cover& a, const Cover& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return all;
}

}  // namespace tamp

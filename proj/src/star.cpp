#include "tamp/star.hpp"

#include <algorithm>
#include <stdexcept>

namespace tamp {

std::size_t StarView::r_total() const {
    std::size_t n = 0;
    for (auto x : r) n += x;
    return n;
}

std::size_t StarView::s_total() const {
    std::size_t n = 0;
    for (auto x : s) n += x;
    return n;
}

const Bandwidth& StarView::w(std::size_t i) const {
    if (!(up[i] == down[i])) throw std::invalid_argument("star link is asymmetric");
    return up[i];
}

std::size_t StarView::position(NodeId v) const {
    auto it = std::find(nodes.begin(), nodes.end(), v);
    if (it == nodes.end()) throw std::invalid_argument("not a compute node of the star");
    return static_cast<std::size_t>(it - nodes.begin());
}

bool is_star(const Topology& t) {
    if (!t.skeleton_is_tree()) return false;
    std::vector<NodeId> routers;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (!t.is_compute(v)) routers.push_back(v);
    if (routers.size() != 1) return false;
    for (NodeId v : t.compute_nodes()) {
        auto nb = t.neighbors(v);
        if (nb.size() != 1 || nb[0] != routers[0]) return false;
        if (!t.find_edge(v, routers[0]) || !t.find_edge(routers[0], v)) return false;
    }
    return !t.compute_nodes().empty();
}

StarView star_view(const Topology& t, const Distribution& d) {
    if (!is_star(t)) throw std::invalid_argument("topology is not a star");
    StarView sv;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (!t.is_compute(v)) sv.center = v;
    for (NodeId v : t.compute_nodes()) {
        sv.nodes.push_back(v);
        sv.up.push_back(t.bandwidth(v, sv.center));
        sv.down.push_back(t.bandwidth(sv.center, v));
        sv.r.push_back(d.r[v].size());
        sv.s.push_back(d.s[v].size());
    }
    return sv;
}

Bandwidth total(const std::vector<Bandwidth>& ws) {
    Rational sum = 0;
    for (const auto& w : ws) {
        if (w.is_infinite()) return Bandwidth::infinite();
        sum += w.value();
    }
    return Bandwidth(sum);
}

std::vector<std::pair<NodeId, Rational>> proportional_probs(const std::vector<NodeId>& nodes,
                                                            const std::vector<Bandwidth>& ws) {
    std::vector<std::pair<NodeId, Rational>> out;
    std::size_t inf = 0;
    for (const auto& w : ws) inf += w.is_infinite();
    if (inf > 0) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            out.emplace_back(nodes[i], ws[i].is_infinite() ? Rational(Rational(1) / inf) : Rational(0));
        return out;
    }
    Rational sum = total(ws).value();
    for (std::size_t i = 0; i < nodes.size(); ++i) out.emplace_back(nodes[i], ws[i].value() / sum);
    return out;
}

}  // namespace tamp

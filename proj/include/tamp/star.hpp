#pragma once

#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <vector>

namespace tamp {

// Compute-node view of a star: leaves in id order with both link directions.
struct StarView {
    NodeId center = 0;
    std::vector<NodeId> nodes;
    std::vector<Bandwidth> up;    // w(v,o)
    std::vector<Bandwidth> down;  // w(o,v)
    std::vector<std::size_t> r, s;  // |R_v|, |S_v|

    std::size_t size() const { return nodes.size(); }
    std::size_t n(std::size_t i) const { return r[i] + s[i]; }
    std::size_t r_total() const;
    std::size_t s_total() const;
    std::size_t total() const { return r_total() + s_total(); }
    // Symmetric bandwidth; throws if up != down.
    const Bandwidth& w(std::size_t i) const;
    std::size_t position(NodeId v) const;
};

bool is_star(const Topology& t);
StarView star_view(const Topology& t, const Distribution& d);

// Sum of bandwidths; infinite if any term is.
Bandwidth total(const std::vector<Bandwidth>& ws);

// Probabilities proportional to ws; infinite entries share all the mass equally.
std::vector<std::pair<NodeId, Rational>> proportional_probs(const std::vector<NodeId>& nodes,
                                                            const std::vector<Bandwidth>& ws);

}  // namespace tamp

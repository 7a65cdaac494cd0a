#include "tamp/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace tamp {

Distribution Distribution::empty(const Topology& t) {
    Distribution d;
    d.r.assign(t.node_count(), {});
    d.s.assign(t.node_count(), {});
    return d;
}

std::size_t Distribution::r_total() const {
    std::size_t n = 0;
    for (const auto& x : r) n += x.size();
    return n;
}

std::size_t Distribution::s_total() const {
    std::size_t n = 0;
    for (const auto& x : s) n += x.size();
    return n;
}

std::vector<Rational> Distribution::sizes() const {
    std::vector<Rational> out(r.size());
    for (std::size_t v = 0; v < r.size(); ++v) out[v] = Rational(n(static_cast<NodeId>(v)));
    return out;
}

Distribution Distribution::swapped() const {
    Distribution d;
    d.r = s;
    d.s = r;
    return d;
}

Labeling::Labeling(const Distribution& d) {
    std::size_t n = d.r.size();
    r_offset.assign(n + 1, 0);
    s_offset.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
        r_offset[v + 1] = r_offset[v] + d.r[v].size();
        s_offset[v + 1] = s_offset[v] + d.s[v].size();
        for (Key k : d.r[v]) {
            r_keys.push_back(k);
            r_owner.push_back(static_cast<NodeId>(v));
        }
        for (Key k : d.s[v]) {
            s_keys.push_back(k);
            s_owner.push_back(static_cast<NodeId>(v));
        }
    }
}

std::uint64_t TrafficTrace::total_on(EdgeId e) const {
    std::uint64_t t = 0;
    for (const auto& r : rounds)
        if (e < r.size()) t += r[e];
    return t;
}

void send(TrafficTrace& trace, const TreeIndex& index, std::size_t round, NodeId src,
          const std::vector<NodeId>& dests, std::uint64_t payload) {
    const Topology& t = index.topology();
    if (src >= t.node_count()) throw TopologyError("send from unknown node");
    for (NodeId d : dests)
        if (d >= t.node_count()) throw TopologyError("send to unknown node");
    if (payload == 0) return;
    while (trace.rounds.size() <= round) trace.rounds.emplace_back(t.edge_count(), 0);
    for (EdgeId e : index.multicast(src, dests)) trace.rounds[round][e] += payload;
}

CostReport cost(const TrafficTrace& trace, const Topology& t, std::uint64_t seed) {
    CostReport rep;
    rep.seed = seed;
    rep.rounds = trace.rounds.size();
    for (const auto& round : trace.rounds) {
        RoundMax m;
        for (EdgeId e = 0; e < round.size(); ++e) {
            if (round[e] == 0) continue;
            const Bandwidth& w = t.edge(e).bw;
            if (!w.is_infinite() && w.value() <= 0) {
                m.infinite = true;
                m.edge = e;
                rep.diagnostic = "traffic on zero-bandwidth edge " + t.name(t.edge(e).from) + "->" + t.name(t.edge(e).to);
                break;
            }
            Rational c = ratio(Rational(round[e]), w);
            if (!m.edge || c > m.cost) {
                m.cost = c;
                m.edge = e;
            }
        }
        if (m.infinite) rep.infinite = true;
        rep.tuple_cost += m.cost;
        rep.per_round.push_back(m);
    }
    rep.bit_cost = rep.tuple_cost * trace.element_width_bits;
    return rep;
}

NodeState::NodeState(const Distribution& d) {
    std::size_t n = d.r.size();
    held_r.assign(n, {});
    held_s.assign(n, {});
    output.assign(n, {});
    Labeling lab(d);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t i = lab.r_offset[v]; i < lab.r_offset[v + 1]; ++i) held_r[v].push_back(static_cast<Index>(i));
        for (std::size_t i = lab.s_offset[v]; i < lab.s_offset[v + 1]; ++i) held_s[v].push_back(static_cast<Index>(i));
    }
}

bool NodeState::holds(Relation rel, NodeId v, Index i) const {
    const auto& h = held(rel, v);
    return std::binary_search(h.begin(), h.end(), i);
}

Simulation::Simulation(const Topology& t, const Distribution& d, unsigned width_bits)
    : t_(&t), d_(&d), index_(t, 0), labels_(d), state_(d) {
    if (d.r.size() != t.node_count() || d.s.size() != t.node_count())
        throw std::invalid_argument("distribution does not match topology");
    trace_.element_width_bits = width_bits;
    pending_r_.assign(t.node_count(), {});
    pending_s_.assign(t.node_count(), {});
}

std::size_t Simulation::begin_round() {
    trace_.rounds.emplace_back(t_->edge_count(), 0);
    return trace_.rounds.size() - 1;
}

void Simulation::charge(NodeId src, const std::vector<NodeId>& dests, std::uint64_t payload) {
    if (trace_.rounds.empty()) throw std::logic_error("charge outside a round");
    send(trace_, index_, round(), src, dests, payload);
}

void Simulation::transfer(NodeId src, const std::vector<NodeId>& dests, Relation rel, const std::vector<Index>& tuples) {
    if (tuples.empty()) return;
    for (NodeId d : dests)
        if (!t_->is_compute(d)) throw std::logic_error("delivery to router " + t_->name(d));
    charge(src, dests, tuples.size());
    auto& pending = rel == Relation::R ? pending_r_ : pending_s_;
    for (NodeId d : dests) {
        if (d == src) continue;
        pending[d].insert(pending[d].end(), tuples.begin(), tuples.end());
    }
}

void Simulation::transfer_one(NodeId src, const std::vector<NodeId>& dests, Relation rel, Index tuple) {
    transfer(src, dests, rel, std::vector<Index>{tuple});
}

void Simulation::finish() {
    auto merge = [](std::vector<Index>& held, std::vector<Index>& pend) {
        if (pend.empty()) return;
        held.insert(held.end(), pend.begin(), pend.end());
        std::sort(held.begin(), held.end());
        held.erase(std::unique(held.begin(), held.end()), held.end());
        pend.clear();
    };
    for (std::size_t v = 0; v < pending_r_.size(); ++v) {
        merge(state_.held_r[v], pending_r_[v]);
        merge(state_.held_s[v], pending_s_[v]);
    }
}

std::pair<TrafficTrace, NodeState> Simulation::take() {
    finish();
    return {trace_, state_};
}

void converge(Simulation& sim, NodeId target) {
    const auto& d = sim.distribution();
    const auto& lab = sim.labels();
    for (NodeId v : sim.topology().compute_nodes()) {
        if (v == target) continue;
        std::vector<Index> rs, ss;
        for (std::size_t i = lab.r_offset[v]; i < lab.r_offset[v] + d.r[v].size(); ++i) rs.push_back(static_cast<Index>(i));
        for (std::size_t i = lab.s_offset[v]; i < lab.s_offset[v] + d.s[v].size(); ++i) ss.push_back(static_cast<Index>(i));
        sim.transfer(v, {target}, Relation::R, rs);
        sim.transfer(v, {target}, Relation::S, ss);
    }
}

void Batch::add(NodeId src, std::vector<NodeId> dests, Relation rel, Index tuple) {
    std::sort(dests.begin(), dests.end());
    dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
    dests.erase(std::remove(dests.begin(), dests.end(), src), dests.end());
    if (dests.empty()) return;
    groups_[{src, std::move(dests), rel == Relation::R ? 0 : 1}].push_back(tuple);
}

void Batch::flush(Simulation& sim) {
    for (auto& [k, tuples] : groups_)
        sim.transfer(std::get<0>(k), std::get<1>(k), std::get<2>(k) == 0 ? Relation::R : Relation::S, tuples);
    groups_.clear();
}

Verdict verify_intersection(const NodeState& st, const Distribution& d) {
    Labeling lab(d);
    std::set<Key> rk(lab.r_keys.begin(), lab.r_keys.end()), both;
    for (Key k : lab.s_keys)
        if (rk.count(k)) both.insert(k);
    std::set<Key> found;
    for (std::size_t v = 0; v < st.held_r.size(); ++v) {
        std::set<Key> here;
        for (Index i : st.held_r[v]) here.insert(lab.r_keys[i]);
        for (Index j : st.held_s[v])
            if (here.count(lab.s_keys[j])) found.insert(lab.s_keys[j]);
    }
    Verdict out;
    for (Key k : both)
        if (!found.count(k)) {
            out.ok = false;
            out.witness += (out.witness.empty() ? "" : ",") + std::to_string(k);
        }
    if (!out.ok) out.witness = "missing keys {" + out.witness + "}";
    return out;
}

namespace {

// Checks that every (row, col) pair of the given index lists is colocated somewhere.
Verdict check_grid(const NodeState& st, const std::vector<Index>& rows, const std::vector<Index>& cols) {
    Verdict out;
    if (rows.empty() || cols.empty()) return out;
    std::unordered_map<Index, std::size_t> row_pos, col_pos;
    for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = i;
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = j;
    std::size_t words = (cols.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> covered(rows.size(), std::vector<std::uint64_t>(words, 0));
    for (std::size_t v = 0; v < st.held_r.size(); ++v) {
        std::vector<std::uint64_t> mask(words, 0);
        bool any = false;
        for (Index j : st.held_s[v]) {
            auto it = col_pos.find(j);
            if (it == col_pos.end()) continue;
            mask[it->second / 64] |= std::uint64_t(1) << (it->second % 64);
            any = true;
        }
        if (!any) continue;
        for (Index i : st.held_r[v]) {
            auto it = row_pos.find(i);
            if (it == row_pos.end()) continue;
            auto& row = covered[it->second];
            for (std::size_t w = 0; w < words; ++w) row[w] |= mask[w];
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (!((covered[i][j / 64] >> (j % 64)) & 1)) {
                out.ok = false;
                out.witness = "uncovered pair (" + std::to_string(rows[i] + 1) + "," + std::to_string(cols[j] + 1) + ")";
                return out;
            }
    return out;
}

}  // namespace

Verdict verify_cartesian(const NodeState& st, const Distribution& d) {
    std::vector<Index> rows(d.r_total()), cols(d.s_total());
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    return check_grid(st, rows, cols);
}

Verdict verify_join(const NodeState& st, const Distribution& d) {
    Labeling lab(d);
    std::map<Key, std::pair<std::vector<Index>, std::vector<Index>>> groups;
    for (Index i = 0; i < lab.r_keys.size(); ++i) groups[lab.r_keys[i]].first.push_back(i);
    for (Index j = 0; j < lab.s_keys.size(); ++j) groups[lab.s_keys[j]].second.push_back(j);
    for (const auto& [k, g] : groups) {
        Verdict v = check_grid(st, g.first, g.second);
        if (!v) {
            v.witness = "key " + std::to_string(k) + ": " + v.witness;
            return v;
        }
    }
    return {};
}

Verdict verify_sorted(const NodeState& st, const Distribution& d, const std::vector<NodeId>& order) {
    std::vector<Key> all;
    for (NodeId v : order) all.insert(all.end(), st.output[v].begin(), st.output[v].end());
    Verdict out;
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i] < all[i - 1]) {
            out.ok = false;
            out.witness = "inversion at output position " + std::to_string(i);
            return out;
        }
    Labeling lab(d);
    std::vector<Key> input = lab.r_keys;
    std::sort(input.begin(), input.end());
    if (input != all) {
        out.ok = false;
        out.witness = "output multiset differs from input";
    }
    return out;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

HashFunction::HashFunction(std::uint64_t seed, std::uint64_t fid, const std::vector<std::pair<NodeId, Rational>>& probs)
    : seed_(seed), fid_(fid) {
    auto sorted = probs;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Rational sum = 0;
    for (auto& [v, p] : sorted) {
        if (p < 0) throw std::invalid_argument("negative probability");
        sum += p;
    }
    if (sum != 1) throw std::invalid_argument("hash probabilities sum to " + render(sum) + ", not 1");
    Integer two64 = Integer(1) << 64;
    Rational cum = 0;
    for (auto& [v, p] : sorted) {
        if (p == 0) continue;
        cum += p;
        Integer up = ceil(cum * Rational(two64));
        nodes_.push_back(v);
        upper_.push_back(up == two64 ? (static_cast<unsigned __int128>(1) << 64)
                                     : static_cast<unsigned __int128>(up.convert_to<unsigned long long>()));
    }
}

NodeId HashFunction::operator()(Key key) const {
    std::uint64_t u = mix64(seed_ ^ mix64(fid_ ^ mix64(static_cast<std::uint64_t>(key))));
    auto it = std::upper_bound(upper_.begin(), upper_.end(), static_cast<unsigned __int128>(u));
    return nodes_[static_cast<std::size_t>(it - upper_.begin())];
}

HashFunction make_hash(std::uint64_t seed, std::uint64_t fid, const std::vector<std::pair<NodeId, Rational>>& probs) {
    return HashFunction(seed, fid, probs);
}

namespace {

std::vector<Key> draw_distinct(Rng& rng, std::size_t n, Key space) {
    if (static_cast<Key>(n) > space) throw std::invalid_argument("key space too small");
    std::set<Key> chosen;
    std::vector<Key> out;
    std::uniform_int_distribution<Key> pick(0, space - 1);
    while (out.size() < n) {
        Key k = pick(rng);
        if (chosen.insert(k).second) out.push_back(k);
    }
    return out;
}

}  // namespace

Distribution uniform_instance(const Topology& t, std::size_t n_r, std::size_t n_s, std::uint64_t seed,
                              std::optional<Key> key_space) {
    Rng rng(seed);
    auto cs = t.compute_nodes();
    Key space = key_space.value_or(static_cast<Key>(std::max<std::size_t>(1, n_r + n_s)));
    Distribution d = Distribution::empty(t);
    std::uniform_int_distribution<std::size_t> where(0, cs.size() - 1);
    for (Key k : draw_distinct(rng, n_r, space)) d.r[cs[where(rng)]].push_back(k);
    for (Key k : draw_distinct(rng, n_s, space)) d.s[cs[where(rng)]].push_back(k);
    return d;
}

Distribution counts_instance(const Topology& t, const std::vector<std::size_t>& r_counts,
                             const std::vector<std::size_t>& s_counts, std::uint64_t seed,
                             std::optional<Key> key_space) {
    auto cs = t.compute_nodes();
    if (r_counts.size() != cs.size() || s_counts.size() != cs.size())
        throw std::invalid_argument("counts must list every compute node");
    std::size_t nr = std::accumulate(r_counts.begin(), r_counts.end(), std::size_t(0));
    std::size_t ns = std::accumulate(s_counts.begin(), s_counts.end(), std::size_t(0));
    Rng rng(seed);
    Key space = key_space.value_or(static_cast<Key>(std::max<std::size_t>(1, nr + ns)));
    auto rk = draw_distinct(rng, nr, space);
    auto sk = draw_distinct(rng, ns, space);
    Distribution d = Distribution::empty(t);
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t c = 0; c < r_counts[i]; ++c) d.r[cs[i]].push_back(rk[a++]);
        for (std::size_t c = 0; c < s_counts[i]; ++c) d.s[cs[i]].push_back(sk[b++]);
    }
    return d;
}

Distribution skewed_join_instance(const Topology& t, std::size_t n_r, std::size_t n_s, double zipf_s,
                                  std::uint64_t seed, std::size_t domain) {
    if (domain == 0) domain = std::max<std::size_t>(1, (n_r + n_s) / 2);
    std::vector<double> weights(domain);
    for (std::size_t k = 0; k < domain; ++k) weights[k] = std::pow(static_cast<double>(k + 1), -zipf_s);
    Rng rng(seed);
    std::discrete_distribution<std::size_t> key(weights.begin(), weights.end());
    auto cs = t.compute_nodes();
    std::uniform_int_distribution<std::size_t> where(0, cs.size() - 1);
    Distribution d = Distribution::empty(t);
    for (std::size_t i = 0; i < n_r; ++i) d.r[cs[where(rng)]].push_back(static_cast<Key>(key(rng) + 1));
    for (std::size_t i = 0; i < n_s; ++i) d.s[cs[where(rng)]].push_back(static_cast<Key>(key(rng) + 1));
    return d;
}

Distribution adversarial_sort_instance(const std::vector<NodeId>& order, const std::vector<std::size_t>& sizes,
                                       std::size_t node_count) {
    if (order.size() != sizes.size()) throw std::invalid_argument("one size per ordered node required");
    std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t(0));
    std::vector<Key> seq;
    for (std::size_t r = 1; r <= n; r += 2) seq.push_back(static_cast<Key>(r));
    for (std::size_t r = 2; r <= n; r += 2) seq.push_back(static_cast<Key>(r));
    Distribution d;
    d.r.assign(node_count, {});
    d.s.assign(node_count, {});
    std::size_t pos = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t c = 0; c < sizes[i]; ++c) d.r[order[i]].push_back(seq[pos++]);
    return d;
}

}  // namespace tamp

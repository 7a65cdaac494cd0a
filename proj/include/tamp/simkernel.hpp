#pragma once

#include "tamp/number.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tamp {

using Key = std::int64_t;
using Index = std::uint32_t;  // global tuple index within a relation

enum class Relation { R, S };

// Per-node multisets, indexed by node id; routers hold nothing.
struct Distribution {
    std::vector<std::vector<Key>> r;
    std::vector<std::vector<Key>> s;

    static Distribution empty(const Topology& t);

    std::size_t r_size(NodeId v) const { return r[v].size(); }
    std::size_t s_size(NodeId v) const { return s[v].size(); }
    std::size_t n(NodeId v) const { return r[v].size() + s[v].size(); }
    std::size_t r_total() const;
    std::size_t s_total() const;
    std::size_t total() const { return r_total() + s_total(); }
    std::vector<Rational> sizes() const;  // N_v per node id
    Distribution swapped() const;         // R and S exchanged
};

// Global tuple indices: node v's R tuples are [r_offset[v], r_offset[v+1]).
struct Labeling {
    std::vector<std::size_t> r_offset, s_offset;
    std::vector<Key> r_keys, s_keys;
    std::vector<NodeId> r_owner, s_owner;

    explicit Labeling(const Distribution& d);
    const std::vector<Key>& keys(Relation rel) const { return rel == Relation::R ? r_keys : s_keys; }
    const std::vector<NodeId>& owner(Relation rel) const { return rel == Relation::R ? r_owner : s_owner; }
};

struct TrafficTrace {
    std::vector<std::vector<std::uint64_t>> rounds;  // rounds[i][edge]
    unsigned element_width_bits = 64;

    std::size_t round_count() const { return rounds.size(); }
    std::uint64_t total_on(EdgeId e) const;
};

// Charge payload once on every edge of the union of paths src -> d.
void send(TrafficTrace& trace, const TreeIndex& index, std::size_t round, NodeId src,
          const std::vector<NodeId>& dests, std::uint64_t payload);

struct RoundMax {
    std::optional<EdgeId> edge;
    Rational cost{0};
    bool infinite = false;
};

struct CostReport {
    Rational tuple_cost{0};
    Rational bit_cost{0};
    bool infinite = false;
    std::size_t rounds = 0;
    std::vector<RoundMax> per_round;
    std::uint64_t seed = 0;
    std::string diagnostic;
};

CostReport cost(const TrafficTrace& trace, const Topology& t, std::uint64_t seed = 0);

struct NodeState {
    std::vector<std::vector<Index>> held_r, held_s;  // sorted, unique
    std::vector<std::vector<Key>> output;            // sorted runs (sorting tasks)

    NodeState() = default;
    explicit NodeState(const Distribution& d);
    const std::vector<Index>& held(Relation rel, NodeId v) const { return rel == Relation::R ? held_r[v] : held_s[v]; }
    bool holds(Relation rel, NodeId v, Index i) const;
};

// A protocol run in progress: owns the trace and the node state.
class Simulation {
public:
    Simulation(const Topology& t, const Distribution& d, unsigned width_bits = 64);

    const Topology& topology() const { return *t_; }
    const Distribution& distribution() const { return *d_; }
    const TreeIndex& index() const { return index_; }
    const Labeling& labels() const { return labels_; }

    std::size_t begin_round();
    std::size_t round() const { return trace_.rounds.size() - 1; }

    // Charge only (router relay or accounting-only transfers).
    void charge(NodeId src, const std::vector<NodeId>& dests, std::uint64_t payload);
    // Charge once and deliver the tuples to every destination other than src.
    void transfer(NodeId src, const std::vector<NodeId>& dests, Relation rel, const std::vector<Index>& tuples);
    void transfer_one(NodeId src, const std::vector<NodeId>& dests, Relation rel, Index tuple);

    void set_output(NodeId v, std::vector<Key> run) { state_.output[v] = std::move(run); }
    NodeState& state() { finish(); return state_; }
    const TrafficTrace& trace() const { return trace_; }
    std::pair<TrafficTrace, NodeState> take();

private:
    void finish();
    const Topology* t_;
    const Distribution* d_;
    TreeIndex index_;
    Labeling labels_;
    TrafficTrace trace_;
    NodeState state_;
    std::vector<std::vector<Index>> pending_r_, pending_s_;
};

// Every compute node ships all its tuples to target (one multicast per relation).
void converge(Simulation& sim, NodeId target);

// Groups tuples by (source, destination set) so each group is one multicast.
class Batch {
public:
    void add(NodeId src, std::vector<NodeId> dests, Relation rel, Index tuple);
    void flush(Simulation& sim);
    bool empty() const { return groups_.empty(); }

private:
    std::map<std::tuple<NodeId, std::vector<NodeId>, int>, std::vector<Index>> groups_;
};

struct Verdict {
    bool ok = true;
    std::string witness;
    explicit operator bool() const { return ok; }
};

Verdict verify_intersection(const NodeState& st, const Distribution& d);
Verdict verify_cartesian(const NodeState& st, const Distribution& d);
Verdict verify_join(const NodeState& st, const Distribution& d);
Verdict verify_sorted(const NodeState& st, const Distribution& d, const std::vector<NodeId>& order);

std::uint64_t mix64(std::uint64_t x);

class HashFunction {
public:
    HashFunction(std::uint64_t seed, std::uint64_t fid, const std::vector<std::pair<NodeId, Rational>>& probs);
    NodeId operator()(Key key) const;

private:
    std::uint64_t seed_, fid_;
    std::vector<NodeId> nodes_;
    std::vector<unsigned __int128> upper_;  // node i wins iff u < upper_[i] (cumulative)
};

HashFunction make_hash(std::uint64_t seed, std::uint64_t fid, const std::vector<std::pair<NodeId, Rational>>& probs);

using Rng = std::mt19937_64;

// |R| = n_r and |S| = n_s distinct keys drawn without replacement from
// [0, key_space); each tuple placed at a uniformly random compute node.
Distribution uniform_instance(const Topology& t, std::size_t n_r, std::size_t n_s, std::uint64_t seed,
                              std::optional<Key> key_space = std::nullopt);
// Explicit per-compute-node counts (in compute-node order) with random distinct keys.
Distribution counts_instance(const Topology& t, const std::vector<std::size_t>& r_counts,
                             const std::vector<std::size_t>& s_counts, std::uint64_t seed,
                             std::optional<Key> key_space = std::nullopt);
// Join keys i.i.d. with Pr[key = k] proportional to k^(-zipf_s), k in [1, domain].
Distribution skewed_join_instance(const Topology& t, std::size_t n_r, std::size_t n_s, double zipf_s,
                                  std::uint64_t seed, std::size_t domain = 0);
// Ranks 1..N ordered odd-first then even, chunked left to right by sizes.
Distribution adversarial_sort_instance(const std::vector<NodeId>& order, const std::vector<std::size_t>& sizes,
                                       std::size_t node_count);

}  // namespace tamp

#pragma once

#include "tamp/number.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tamp {

struct KeyDegree {
    std::size_t r = 0, s = 0;
    std::size_t n() const { return r + s; }
};

struct KeyStats {
    std::map<Key, KeyDegree> degree;
    std::vector<Key> heavy;  // sorted
    Rational threshold{0};
    std::size_t total = 0;   // N'
};

// Degrees over the listed R and S tuple indices; heavy iff either degree exceeds threshold.
KeyStats key_stats(const Labeling& lab, const std::vector<Index>& r, const std::vector<Index>& s,
                   const Rational& threshold);

// Hash proportional to bandwidth over nodes with w_v >= W / (2 m log2 m).
HashFunction weighted_hash(const Topology& t, std::uint64_t seed, std::uint64_t fid = 0);
std::vector<NodeId> weighted_hash_support(const Topology& t);

struct JoinRun {
    TrafficTrace trace;
    NodeState state;
    std::string strategy;
    KeyStats stats;
};

JoinRun weighted_hash_join(const Topology& t, const Distribution& d, std::uint64_t seed);

// A cartesian product |R| x |S| for one (virtual) join key.
struct VirtualKey {
    Key key = 0;
    std::size_t chunk = 0;
    std::size_t r = 0, s = 0;              // sizes of the two sides
    std::size_t r_begin = 0, s_begin = 0;  // offsets within the key's R and S tuple lists
    std::size_t n() const { return r + s; }
};

// Chunks the larger side into pieces of the smaller side's size; keys with an empty side vanish.
std::vector<VirtualKey> split_skew(Key key, std::size_t r, std::size_t s);

struct PackStep {
    enum Kind { Absorb, Whc } kind = Absorb;
    std::size_t key_first = 0, key_last = 0;    // 0-based, inclusive, into the sorted keys
    std::size_t node_first = 0, node_last = 0;  // 0-based, inclusive, into the sorted budgets
};

struct PackStrategy {
    Magnitude cost;  // infinity when infeasible
    bool feasible = true;
    std::vector<PackStep> steps;
    std::vector<std::vector<Magnitude>> table;  // table[k][n]
};

// sizes ascending (N_1..N_k), budgets ascending (w_1..w_n).
PackStrategy packcp(const std::vector<Rational>& sizes, const std::vector<Bandwidth>& budgets);
// Cost of a step list under the same formulas.
Magnitude pack_cost(const std::vector<PackStep>& steps, const std::vector<Rational>& sizes,
                    const std::vector<Bandwidth>& budgets);

struct EqPlan {
    bool feasible = false;
    struct Step {
        std::size_t key = 0;
        std::vector<std::size_t> nodes;  // one node: absorb; more: wHC
        bool absorb = true;
    };
    std::vector<Step> steps;
};

// k keys of size n each, budgets w, target cost L.
EqPlan pack_eqcp(std::size_t k, const Rational& n, const std::vector<Bandwidth>& w, const Rational& l);

JoinRun star_join(const Topology& t, const Distribution& d, std::uint64_t seed);

}  // namespace tamp

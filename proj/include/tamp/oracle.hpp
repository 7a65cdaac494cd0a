#pragma once

#include "tamp/number.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tamp {

enum class Task { Intersect, Cartesian, Join };

std::string to_string(Task t);

class OracleGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    Rational opt_cost{0};
    std::vector<std::vector<NodeId>> r_dests, s_dests;  // witness, per global tuple index
    std::uint64_t states = 0;
};

// Minimal one-round cost over destination subsets per tuple such that every
// pair the task requires ends up colocated on some compute node.
OracleResult opt_one_round(const Topology& t, const Distribution& d, Task task,
                           std::uint64_t max_states = 100'000'000);

// Re-costs a destination assignment under the multicast rule.
Rational one_round_cost(const Topology& t, const Distribution& d, const std::vector<std::vector<NodeId>>& r_dests,
                        const std::vector<std::vector<NodeId>>& s_dests);
// Task predicate for a destination assignment.
bool one_round_feasible(const Topology& t, const Distribution& d, Task task,
                        const std::vector<std::vector<NodeId>>& r_dests,
                        const std::vector<std::vector<NodeId>>& s_dests);

struct PackOracleResult {
    Magnitude cost = Magnitude::infinity();
    // label[v] = key index computed jointly on v, or -1 for a node holding whole keys
    std::vector<int> label;
    std::vector<int> owner;  // node of each whole key, -1 if the key is joint
    std::uint64_t states = 0;
};

// Exhaustive optimum over plans where every node either holds whole keys or
// shares one key's product with other nodes of the same label.
PackOracleResult opt_packcp_assignment(const std::vector<Rational>& sizes, const std::vector<Bandwidth>& budgets);

struct SandwichReport {
    Task task = Task::Intersect;
    Magnitude lb;         // raw bound
    Magnitude lb_scaled;  // the bound times the task's constant
    Rational opt{0};
    Rational alg{0};
    std::string algo;
    bool ok = false;
};

SandwichReport sandwich_check(const Topology& t, const Distribution& d, Task task, std::uint64_t seed);

}  // namespace tamp

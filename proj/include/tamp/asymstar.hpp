#pragma once

#include "tamp/number.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <string>
#include <vector>

namespace tamp {

struct SplitResult {
    std::vector<std::size_t> chosen;  // positions into the input list, ascending
    Rational value{0};
};

// min_X max_{X} f + sum_{not X} g
SplitResult opt_split(const std::vector<Rational>& f, const std::vector<Rational>& g);
// min_X max_{X} f + max_{not X} g + sum_{not X} h
SplitResult opt_split3(const std::vector<Rational>& f, const std::vector<Rational>& g, const std::vector<Rational>& h);
// min_X max{ max_{X} f, max_{not X} g, offset + sum_{not X} h }
SplitResult opt_split_bottleneck(const std::vector<Rational>& f, const std::vector<Rational>& g,
                                 const std::vector<Rational>& h, const Rational& offset = 0);

// Exhaustive references over all 2^n subsets (n <= 20).
Rational split_objective(const std::vector<std::size_t>& x, const std::vector<Rational>& f,
                         const std::vector<Rational>& g);
Rational split3_objective(const std::vector<std::size_t>& x, const std::vector<Rational>& f,
                          const std::vector<Rational>& g, const std::vector<Rational>& h);
SplitResult brute_split(const std::vector<Rational>& f, const std::vector<Rational>& g);
SplitResult brute_split3(const std::vector<Rational>& f, const std::vector<Rational>& g, const std::vector<Rational>& h);

// Analytic strategy costs of an asymmetric-star algorithm; strategies are 1-based.
struct AsymPlan {
    std::vector<Rational> costs;     // C1, C2, C3
    int chosen = 1;
    NodeId target = 0;               // strategy 1 destination
    std::vector<NodeId> v1, v2;      // broadcast targets of strategies 2 and 3
    Rational cost() const { return costs[chosen - 1]; }
};

AsymPlan sf_plan(const Topology& t, const Distribution& d);
AsymPlan rf_plan(const Topology& t, const Distribution& d);
AsymPlan asym_plan(const Topology& t, const Distribution& d);

struct AsymRun {
    TrafficTrace trace;
    NodeState state;
    AsymPlan plan;
};

AsymRun sf_star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed);
AsymRun rf_star_intersect(const Topology& t, const Distribution& d);
AsymRun asym_star_intersect(const Topology& t, const Distribution& d, std::uint64_t seed);

}  // namespace tamp

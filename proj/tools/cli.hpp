#pragma once

#include "tamp/oracle.hpp"
#include "tamp/simkernel.hpp"
#include "tamp/topology.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tamp::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class VerifyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// {"symmetric": bool, "nodes": [{"id", "compute"}], "edges": [{"from", "to", "bw"}]}
// With symmetric true each listed edge is added in both directions.
Topology parse_topology(const std::string& text);
// A path, or "star:w1,w2,..." where each w is "x" or "up/down".
Topology load_topology(const std::string& spec);

// {"nodes": [{"node", "r": [keys] | count, "s": [keys] | count}]}
Distribution parse_distribution(const Topology& t, const std::string& text);
// A path, or gen:uniform,r=..,s=..[,space=..] | gen:zipf:S,n=..[,r=..,s=..,domain=..] | gen:adversarial,n=..
Distribution load_distribution(const Topology& t, const std::string& spec, std::uint64_t seed);
bool is_generator(const std::string& spec);

struct ExperimentConfig {
    std::string task = "intersect";
    std::string algo;
    std::string topo;
    std::string dist;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    unsigned width_bits = 64;
    bool oracle = false;
};

struct ExperimentOutput {
    std::string csv;
    std::string trace_csv;
};

// Throws ConfigError for bad input and VerifyError when a protocol's output is wrong.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

std::string bounds_table(const Topology& t, const Distribution& d);
std::string validate_report(const std::string& topo_spec, const std::optional<std::string>& dist_spec,
                            const std::string& task, std::uint64_t seed, bool* ok);
std::string oracle_report(const Topology& t, const Distribution& d, Task task, std::uint64_t seed,
                          std::uint64_t max_states);

Task parse_task(const std::string& name);

}  // namespace tamp::cli

#include "tamp/sortnet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace tamp {

namespace {

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

std::vector<Index> r_indices(const Labeling& lab, const Distribution& d, NodeId v) {
    std::vector<Index> out;
    for (std::size_t i = lab.r_offset[v]; i < lab.r_offset[v] + d.r[v].size(); ++i) out.push_back(static_cast<Index>(i));
    return out;
}

double sampling_rate(std::size_t nodes, std::size_t n) {
    if (n == 0) return 0;
    double p = static_cast<double>(nodes), m = static_cast<double>(n);
    return std::min(1.0, 4.0 * (p / m) * std::log(p * m));
}

// Index of the interval b_i <= x < b_{i+1}; interior nullopt reads as +infinity.
std::size_t interval_of(const std::vector<std::optional<Key>>& b, Key x) {
    std::size_t i = 0;
    for (std::size_t j = 1; j + 1 < b.size(); ++j)
        if (b[j] && *b[j] <= x) i = j;
    return i;
}

// Ships each element of holdings[j] to targets[interval], sorts locally, sets outputs.
void route_and_sort(Simulation& sim, const std::vector<NodeId>& holders, const std::vector<std::vector<Index>>& holdings,
                    const std::vector<NodeId>& targets, const std::vector<std::optional<Key>>& b) {
    const auto& lab = sim.labels();
    std::vector<std::vector<Key>> out(targets.size());
    Batch batch;
    for (std::size_t j = 0; j < holders.size(); ++j)
        for (Index i : holdings[j]) {
            std::size_t k = interval_of(b, lab.r_keys[i]);
            batch.add(holders[j], {targets[k]}, Relation::R, i);
            out[k].push_back(lab.r_keys[i]);
        }
    batch.flush(sim);
    for (std::size_t k = 0; k < targets.size(); ++k) {
        std::sort(out[k].begin(), out[k].end());
        sim.set_output(targets[k], std::move(out[k]));
    }
}

NodeId sort_root(const Topology& t) {
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (!t.is_compute(v)) return v;
    return 0;
}

}  // namespace

std::vector<NodeId> valid_ordering(const Topology& t, NodeId root) {
    std::vector<NodeId> out;
    std::function<void(NodeId, std::optional<NodeId>)> visit = [&](NodeId v, std::optional<NodeId> from) {
        if (t.is_compute(v)) out.push_back(v);
        for (NodeId u : t.neighbors(v))
            if (u != from) visit(u, v);
    };
    visit(root, std::nullopt);
    return out;
}

std::vector<std::size_t> proportional(const std::vector<Rational>& weights, std::size_t n) {
    if (weights.empty()) {
        if (n > 0) throw std::invalid_argument("no targets for a nonempty allocation");
        return {};
    }
    Rational total = 0;
    for (const auto& w : weights) {
        if (w <= 0) throw std::invalid_argument("allocation weights must be positive");
        total += w;
    }
    std::vector<std::size_t> out;
    Rational delta = 0;
    for (const auto& w : weights) {
        Rational x = w / total * sz(n);
        Integer fl = floor(x);
        Rational frac = x - Rational(fl);
        if (delta >= frac) {
            out.push_back(fl.convert_to<std::size_t>());
            delta -= frac;
        } else {
            out.push_back(fl.convert_to<std::size_t>() + 1);
            delta += 1 - frac;
        }
    }
    return out;
}

SortRun wts_sort(const Topology& t, const Distribution& d, std::uint64_t seed) {
    SortRun run;
    run.strategy = "wts";
    auto& plan = run.plan;
    std::vector<NodeId> order = valid_ordering(t, sort_root(t));
    std::size_t p = order.size(), n = d.r_total();
    for (NodeId v : order) (2 * p * d.r_size(v) >= n ? plan.heavy : plan.light).push_back(v);
    if (plan.heavy.empty()) throw std::logic_error("no heavy node");
    std::size_t k = plan.heavy.size();
    Simulation sim(t, d);
    const auto& lab = sim.labels();

    // Round 1: light nodes spread their data over the heavy nodes.
    sim.begin_round();
    std::vector<std::vector<Index>> hold(k);
    std::vector<Rational> heavy_sizes;
    for (std::size_t j = 0; j < k; ++j) {
        hold[j] = r_indices(lab, d, plan.heavy[j]);
        heavy_sizes.push_back(std::max<Rational>(sz(d.r_size(plan.heavy[j])), Rational(1)));
    }
    for (NodeId u : plan.light) {
        auto mine = r_indices(lab, d, u);
        auto alloc = proportional(heavy_sizes, mine.size());
        std::size_t at = 0;
        for (std::size_t j = 0; j < k && at < mine.size(); ++j) {
            std::vector<Index> chunk;
            for (std::size_t c = 0; c < alloc[j] && at < mine.size(); ++c) chunk.push_back(mine[at++]);
            if (chunk.empty()) continue;
            sim.transfer(u, {plan.heavy[j]}, Relation::R, chunk);
            hold[j].insert(hold[j].end(), chunk.begin(), chunk.end());
        }
    }
    for (const auto& h : hold) plan.post_round1_sizes.push_back(h.size());

    // Round 2: Bernoulli sampling, samples and sizes to v_1.
    sim.begin_round();
    plan.rho = sampling_rate(p, n);
    Rng rng(seed);
    std::bernoulli_distribution coin(plan.rho);
    std::vector<Key> samples;
    NodeId v1 = plan.heavy[0];
    for (std::size_t j = 0; j < k; ++j) {
        std::uint64_t taken = 0;
        for (Index i : hold[j])
            if (coin(rng)) {
                samples.push_back(lab.r_keys[i]);
                ++taken;
            }
        if (plan.heavy[j] != v1) sim.charge(plan.heavy[j], {v1}, taken + 1);
    }
    std::sort(samples.begin(), samples.end());
    plan.samples = samples.size();

    // Round 3: splitters from v_1 to every heavy node.
    sim.begin_round();
    std::size_t step = plan.samples == 0 ? 0 : (plan.samples + p - 1) / p;
    for (std::size_t i = 1; i <= p && plan.samples > 0; ++i)
        plan.quantiles.push_back(samples[std::min(i * step, plan.samples) - 1]);
    for (std::size_t j = 0; j < k; ++j) {
        Rational c = sz(p) * sz(plan.post_round1_sizes[j]) / (n == 0 ? Rational(1) : sz(n));
        plan.interval_counts.push_back(ceil(c).convert_to<std::size_t>());
    }
    plan.splitters.assign(k + 1, std::nullopt);
    std::size_t acc = 0;
    for (std::size_t i = 1; i < k; ++i) {
        acc += plan.interval_counts[i - 1];
        if (!plan.quantiles.empty() && acc > 0)
            plan.splitters[i] = plan.quantiles[std::min(acc, plan.quantiles.size()) - 1];
    }
    for (std::size_t i = 2; i < k; ++i)
        if (plan.splitters[i] && plan.splitters[i - 1] && *plan.splitters[i] < *plan.splitters[i - 1])
            plan.splitters[i] = plan.splitters[i - 1];
    std::vector<NodeId> others;
    for (NodeId v : plan.heavy)
        if (v != v1) others.push_back(v);
    if (!others.empty()) sim.charge(v1, others, k + 1);

    // Round 4: range partition and local sort.
    sim.begin_round();
    route_and_sort(sim, plan.heavy, hold, plan.heavy, plan.splitters);
    run.order = plan.heavy;
    std::tie(run.trace, run.state) = sim.take();
    return run;
}

SortRun terasort(const Topology& t, const Distribution& d, std::uint64_t seed) {
    SortRun run;
    run.strategy = "terasort";
    auto& plan = run.plan;
    std::vector<NodeId> order = valid_ordering(t, sort_root(t));
    std::size_t p = order.size(), n = d.r_total();
    plan.heavy = order;
    NodeId coord = *std::min_element(order.begin(), order.end());
    Simulation sim(t, d);
    const auto& lab = sim.labels();
    std::vector<std::vector<Index>> hold;
    for (NodeId v : order) {
        hold.push_back(r_indices(lab, d, v));
        plan.post_round1_sizes.push_back(d.r_size(v));
    }

    sim.begin_round();
    plan.rho = sampling_rate(p, n);
    Rng rng(seed);
    std::bernoulli_distribution coin(plan.rho);
    std::vector<Key> samples;
    for (std::size_t j = 0; j < p; ++j) {
        std::uint64_t taken = 0;
        for (Index i : hold[j])
            if (coin(rng)) {
                samples.push_back(lab.r_keys[i]);
                ++taken;
            }
        if (order[j] != coord && taken > 0) sim.charge(order[j], {coord}, taken);
    }
    std::sort(samples.begin(), samples.end());
    plan.samples = samples.size();

    sim.begin_round();
    std::size_t step = plan.samples == 0 ? 0 : (plan.samples + p - 1) / p;
    plan.splitters.assign(p + 1, std::nullopt);
    for (std::size_t i = 1; i < p && plan.samples > 0; ++i) {
        plan.splitters[i] = samples[std::min(i * step, plan.samples) - 1];
        plan.quantiles.push_back(*plan.splitters[i]);
    }
    std::vector<NodeId> others;
    for (NodeId v : order)
        if (v != coord) others.push_back(v);
    if (!others.empty()) sim.charge(coord, others, p + 1);

    sim.begin_round();
    route_and_sort(sim, order, hold, order, plan.splitters);
    run.order = order;
    std::tie(run.trace, run.state) = sim.take();
    return run;
}

SortRun send_all_to_max(const Topology& t, const Distribution& d) {
    SortRun run;
    run.strategy = "converge";
    auto nodes = t.compute_nodes();
    if (nodes.empty()) throw std::invalid_argument("no compute nodes");
    NodeId target = nodes[0];
    for (NodeId v : nodes)
        if (d.r_size(v) > d.r_size(target)) target = v;
    Simulation sim(t, d);
    const auto& lab = sim.labels();
    sim.begin_round();
    for (NodeId v : nodes)
        if (v != target && d.r_size(v) > 0) sim.transfer(v, {target}, Relation::R, r_indices(lab, d, v));
    std::vector<Key> all = lab.r_keys;
    std::sort(all.begin(), all.end());
    sim.set_output(target, std::move(all));
    run.plan.heavy = {target};
    run.order = {target};
    std::tie(run.trace, run.state) = sim.take();
    return run;
}

}  // namespace tamp

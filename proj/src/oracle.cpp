#include "tamp/oracle.hpp"

#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/intersect.hpp"
#include "tamp/joinstar.hpp"
#include "tamp/star.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace tamp {

std::string to_string(Task t) {
    switch (t) {
    case Task::Intersect: return "intersect";
    case Task::Cartesian: return "cartesian";
    case Task::Join: return "join";
    }
    return "?";
}

namespace {

Rational sz(std::uint64_t n) { return Rational(static_cast<unsigned long long>(n)); }

struct Element {
    NodeId owner = 0;
    Relation rel = Relation::R;
    Index index = 0;
    Key key = 0;
};

std::vector<Element> elements(const Labeling& lab) {
    std::vector<Element> out;
    for (std::size_t i = 0; i < lab.r_keys.size(); ++i)
        out.push_back({lab.r_owner[i], Relation::R, static_cast<Index>(i), lab.r_keys[i]});
    for (std::size_t i = 0; i < lab.s_keys.size(); ++i)
        out.push_back({lab.s_owner[i], Relation::S, static_cast<Index>(i), lab.s_keys[i]});
    return out;
}

bool must_meet(Task task, Key r, Key s) { return task == Task::Cartesian || r == s; }

Rational max_cost(const Topology& t, const std::vector<std::uint64_t>& load) {
    Rational out = 0;
    for (EdgeId e = 0; e < load.size(); ++e)
        if (load[e] > 0) out = std::max(out, ratio(sz(load[e]), t.edge(e).bw));
    return out;
}

}  // namespace

Rational one_round_cost(const Topology& t, const Distribution& d, const std::vector<std::vector<NodeId>>& r_dests,
                        const std::vector<std::vector<NodeId>>& s_dests) {
    Labeling lab(d);
    TreeIndex idx(t);
    std::vector<std::uint64_t> load(t.edge_count(), 0);
    auto add = [&](NodeId src, const std::vector<NodeId>& dests) {
        std::vector<NodeId> ds;
        for (NodeId v : dests)
            if (v != src) ds.push_back(v);
        if (ds.empty()) return;
        for (EdgeId e : idx.multicast(src, ds)) ++load[e];
    };
    for (std::size_t i = 0; i < r_dests.size(); ++i) add(lab.r_owner[i], r_dests[i]);
    for (std::size_t i = 0; i < s_dests.size(); ++i) add(lab.s_owner[i], s_dests[i]);
    return max_cost(t, load);
}

bool one_round_feasible(const Topology& t, const Distribution& d, Task task,
                        const std::vector<std::vector<NodeId>>& r_dests,
                        const std::vector<std::vector<NodeId>>& s_dests) {
    Labeling lab(d);
    std::size_t n = t.node_count();
    auto held = [&](NodeId owner, const std::vector<NodeId>& dests) {
        std::vector<bool> h(n, false);
        h[owner] = true;
        for (NodeId v : dests) h[v] = true;
        return h;
    };
    for (std::size_t i = 0; i < lab.r_keys.size(); ++i) {
        auto hr = held(lab.r_owner[i], r_dests[i]);
        for (std::size_t j = 0; j < lab.s_keys.size(); ++j) {
            if (!must_meet(task, lab.r_keys[i], lab.s_keys[j])) continue;
            auto hs = held(lab.s_owner[j], s_dests[j]);
            bool met = false;
            for (NodeId v = 0; v < n && !met; ++v) met = hr[v] && hs[v] && t.is_compute(v);
            if (!met) return false;
        }
    }
    return true;
}

OracleResult opt_one_round(const Topology& t, const Distribution& d, Task task, std::uint64_t max_states) {
    Labeling lab(d);
    TreeIndex idx(t);
    auto compute = t.compute_nodes();
    std::size_t p = compute.size();
    if (p > 16) throw OracleGuard("too many compute nodes for the oracle");
    std::vector<std::size_t> pos(t.node_count(), 0);
    for (std::size_t i = 0; i < p; ++i) pos[compute[i]] = i;
    auto els = elements(lab);
    std::size_t m = els.size();

    struct Option {
        unsigned mask = 0;
        std::vector<NodeId> dests;
        std::vector<EdgeId> edges;
    };
    std::vector<std::vector<Option>> options(m);
    std::vector<unsigned> own(m);
    for (std::size_t e = 0; e < m; ++e) {
        own[e] = 1u << pos[els[e].owner];
        bool needed = false;
        for (std::size_t f = 0; f < m; ++f)
            if (els[f].rel != els[e].rel) {
                Key r = els[e].rel == Relation::R ? els[e].key : els[f].key;
                Key s = els[e].rel == Relation::R ? els[f].key : els[e].key;
                needed = needed || must_meet(task, r, s);
            }
        for (unsigned mask = 0; mask < (1u << p); ++mask) {
            if (mask & own[e]) continue;
            if (!needed && mask != 0) break;
            Option o;
            o.mask = mask | own[e];
            for (std::size_t i = 0; i < p; ++i)
                if (mask >> i & 1) o.dests.push_back(compute[i]);
            if (!o.dests.empty()) o.edges = idx.multicast(els[e].owner, o.dests);
            options[e].push_back(std::move(o));
        }
    }
    // Pairs to check once both ends are fixed, attached to the later element.
    std::vector<std::vector<std::size_t>> partners(m);
    for (std::size_t e = 0; e < m; ++e)
        for (std::size_t f = 0; f < e; ++f) {
            if (els[e].rel == els[f].rel) continue;
            Key r = els[e].rel == Relation::R ? els[e].key : els[f].key;
            Key s = els[e].rel == Relation::R ? els[f].key : els[e].key;
            if (must_meet(task, r, s)) partners[e].push_back(f);
        }

    OracleResult res;
    std::optional<Rational> best;
    std::vector<std::size_t> choice(m, 0), best_choice(m, 0);
    std::vector<unsigned> held(m, 0);
    std::vector<std::uint64_t> load(t.edge_count(), 0);
    std::vector<Rational> inv(t.edge_count(), 0);
    for (EdgeId e = 0; e < t.edge_count(); ++e)
        inv[e] = t.edge(e).bw.is_infinite() ? Rational(0) : Rational(1 / t.edge(e).bw.value());

    std::function<void(std::size_t, const Rational&)> dfs = [&](std::size_t e, const Rational& cur) {
        if (++res.states > max_states) throw OracleGuard("oracle state guard exceeded");
        if (best && cur >= *best) return;
        if (e == m) {
            best = cur;
            best_choice = choice;
            return;
        }
        for (std::size_t k = 0; k < options[e].size(); ++k) {
            const Option& o = options[e][k];
            held[e] = o.mask;
            bool ok = true;
            for (std::size_t f : partners[e])
                if (!(held[e] & held[f])) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            Rational next = cur;
            for (EdgeId x : o.edges) {
                ++load[x];
                next = std::max(next, sz(load[x]) * inv[x]);
            }
            choice[e] = k;
            dfs(e + 1, next);
            for (EdgeId x : o.edges) --load[x];
        }
    };
    dfs(0, Rational(0));
    if (!best) throw OracleGuard("no feasible assignment");
    res.opt_cost = *best;
    res.r_dests.assign(lab.r_keys.size(), {});
    res.s_dests.assign(lab.s_keys.size(), {});
    for (std::size_t e = 0; e < m; ++e) {
        const auto& dests = options[e][best_choice[e]].dests;
        (els[e].rel == Relation::R ? res.r_dests : res.s_dests)[els[e].index] = dests;
    }
    return res;
}

PackOracleResult opt_packcp_assignment(const std::vector<Rational>& sizes, const std::vector<Bandwidth>& budgets) {
    std::size_t k = sizes.size(), n = budgets.size();
    PackOracleResult res;
    if (k == 0) {
        res.cost = Magnitude::of(0);
        res.label.assign(n, -1);
        return res;
    }
    std::vector<int> label(n, -1), owner(k, -1);
    auto eval_labels = [&]() {
        std::vector<Rational> mass(k, 0);
        std::vector<bool> joint(k, false), inf(k, false);
        std::vector<std::size_t> holders;
        for (std::size_t v = 0; v < n; ++v) {
            if (label[v] < 0) {
                holders.push_back(v);
                continue;
            }
            joint[label[v]] = true;
            if (budgets[v].is_infinite()) inf[label[v]] = true;
            else mass[label[v]] += budgets[v].value() * budgets[v].value();
        }
        Magnitude base = Magnitude::of(0);
        std::vector<std::size_t> whole;
        for (std::size_t a = 0; a < k; ++a) {
            if (!joint[a]) {
                whole.push_back(a);
                continue;
            }
            if (!inf[a]) base = max(base, Magnitude::sqrt_of(sizes[a] * sizes[a] / mass[a]));
        }
        if (!whole.empty() && holders.empty()) return;
        if (res.cost <= base) return;
        std::vector<std::size_t> at(whole.size(), 0);
        for (;;) {
            ++res.states;
            std::vector<Rational> load(n, 0);
            for (std::size_t q = 0; q < whole.size(); ++q) load[holders[at[q]]] += sizes[whole[q]];
            Magnitude c = base;
            for (std::size_t v : holders) c = max(c, Magnitude::of(ratio(load[v], budgets[v])));
            if (c < res.cost) {
                res.cost = c;
                res.label = label;
                res.owner.assign(k, -1);
                for (std::size_t q = 0; q < whole.size(); ++q) res.owner[whole[q]] = static_cast<int>(holders[at[q]]);
            }
            std::size_t q = 0;
            while (q < whole.size() && ++at[q] == holders.size()) at[q++] = 0;
            if (q == whole.size()) break;
        }
    };
    for (;;) {
        eval_labels();
        std::size_t v = 0;
        while (v < n && ++label[v] == static_cast<int>(k)) label[v++] = -1;
        if (v == n) break;
    }
    return res;
}

SandwichReport sandwich_check(const Topology& t, const Distribution& d, Task task, std::uint64_t seed) {
    SandwichReport rep;
    rep.task = task;
    switch (task) {
    case Task::Intersect: {
        rep.lb = lb_intersect_tree(t, d).value;
        rep.lb_scaled = rep.lb * Rational(1, 2);
        auto run = is_star(t) ? star_intersect(t, d, seed) : tree_intersect(t, d, seed);
        rep.algo = is_star(t) ? "star_intersect" : "tree_intersect";
        rep.alg = cost(run.trace, t).tuple_cost;
        break;
    }
    case Task::Cartesian: {
        Magnitude cut = lb_cartesian_cut(t, d).value;
        BoundReport cov = lb_cartesian_cover(t, d);
        rep.lb = cov.applicable ? max(cut, cov.value) : cut;
        rep.lb_scaled = cut * Rational(1, 2);
        if (cov.applicable) rep.lb_scaled = max(rep.lb_scaled, cov.value * Rational(1, 3));
        bool equal = d.r_total() == d.s_total();
        auto run = equal ? star_cartesian(t, d) : generalized_star_cartesian(t, d);
        rep.algo = equal ? "star_cartesian" : "generalized_star_cartesian";
        rep.alg = cost(run.trace, t).tuple_cost;
        break;
    }
    case Task::Join: {
        rep.lb = lb_join_star(t, d).value;
        rep.lb_scaled = rep.lb * Rational(1, 2);
        auto run = star_join(t, d, seed);
        rep.algo = "star_join";
        rep.alg = cost(run.trace, t).tuple_cost;
        break;
    }
    }
    rep.opt = opt_one_round(t, d, task).opt_cost;
    rep.ok = rep.lb_scaled <= Magnitude::of(rep.opt) && rep.opt <= rep.alg;
    return rep;
}

}  // namespace tamp

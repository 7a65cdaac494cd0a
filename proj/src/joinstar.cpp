#include "tamp/joinstar.hpp"

#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/star.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace tamp {

namespace {

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

double approx(const Rational& x) { return x.convert_to<double>(); }

struct Budgets {
    std::vector<NodeId> nodes;
    std::vector<Bandwidth> w;
};

Budgets star_budgets(const Topology& t) {
    StarView sv = star_view(t, Distribution::empty(t));
    Budgets b;
    b.nodes = sv.nodes;
    for (std::size_t i = 0; i < sv.size(); ++i) b.w.push_back(sv.w(i));
    return b;
}

}  // namespace

KeyStats key_stats(const Labeling& lab, const std::vector<Index>& r, const std::vector<Index>& s,
                   const Rational& threshold) {
    KeyStats ks;
    ks.threshold = threshold;
    for (Index i : r) ++ks.degree[lab.r_keys[i]].r;
    for (Index i : s) ++ks.degree[lab.s_keys[i]].s;
    ks.total = r.size() + s.size();
    for (const auto& [k, deg] : ks.degree)
        if (sz(deg.r) > threshold || sz(deg.s) > threshold) ks.heavy.push_back(k);
    return ks;
}

std::vector<NodeId> weighted_hash_support(const Topology& t) {
    Budgets b = star_budgets(t);
    std::size_t m = b.nodes.size();
    Bandwidth total_w = total(b.w);
    std::vector<NodeId> out;
    if (total_w.is_infinite()) {
        for (std::size_t i = 0; i < m; ++i)
            if (b.w[i].is_infinite()) out.push_back(b.nodes[i]);
        return out;
    }
    if (m <= 1) return b.nodes;
    double scale = 2.0 * static_cast<double>(m) * std::log2(static_cast<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        if (approx(b.w[i].value()) * scale >= approx(total_w.value())) out.push_back(b.nodes[i]);
    return out;
}

HashFunction weighted_hash(const Topology& t, std::uint64_t seed, std::uint64_t fid) {
    Budgets b = star_budgets(t);
    auto support = weighted_hash_support(t);
    std::vector<Bandwidth> ws;
    for (NodeId v : support) ws.push_back(b.w[std::find(b.nodes.begin(), b.nodes.end(), v) - b.nodes.begin()]);
    return make_hash(seed, fid, proportional_probs(support, ws));
}

JoinRun weighted_hash_join(const Topology& t, const Distribution& d, std::uint64_t seed) {
    HashFunction h = weighted_hash(t, seed);
    Simulation sim(t, d);
    sim.begin_round();
    const auto& lab = sim.labels();
    Batch b;
    for (Relation rel : {Relation::R, Relation::S}) {
        const auto& keys = lab.keys(rel);
        const auto& owner = lab.owner(rel);
        for (std::size_t i = 0; i < keys.size(); ++i) b.add(owner[i], {h(keys[i])}, rel, static_cast<Index>(i));
    }
    b.flush(sim);
    JoinRun run;
    std::tie(run.trace, run.state) = sim.take();
    run.strategy = "hash";
    return run;
}

std::vector<VirtualKey> split_skew(Key key, std::size_t r, std::size_t s) {
    std::vector<VirtualKey> out;
    if (r == 0 || s == 0) return out;
    if (r <= s) {
        for (std::size_t at = 0, c = 0; at < s; at += r, ++c) out.push_back({key, c, r, std::min(r, s - at), 0, at});
    } else {
        for (std::size_t at = 0, c = 0; at < r; at += s, ++c) out.push_back({key, c, std::min(s, r - at), s, at, 0});
    }
    return out;
}

namespace {

Magnitude absorb_cost(const std::vector<Rational>& prefix, std::size_t first, std::size_t last, const Bandwidth& w) {
    return Magnitude::of(ratio(prefix[last + 1] - prefix[first], w));
}

Magnitude whc_cost(const Rational& n, const std::vector<Bandwidth>& budgets, std::size_t first, std::size_t last) {
    Rational sum = 0;
    for (std::size_t j = first; j <= last; ++j) {
        if (budgets[j].is_infinite()) return Magnitude::of(0);
        sum += budgets[j].value() * budgets[j].value();
    }
    return Magnitude::sqrt_of(n * n / sum);
}

}  // namespace

PackStrategy packcp(const std::vector<Rational>& sizes, const std::vector<Bandwidth>& budgets) {
    std::size_t k = sizes.size(), n = budgets.size();
    std::vector<Rational> prefix(k + 1, 0);
    for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = prefix[j] + sizes[j];
    PackStrategy ps;
    ps.table.assign(k + 1, std::vector<Magnitude>(n + 1, Magnitude::infinity()));
    // choice[a][b] = (absorb?, i) with i 1-based as in the recurrence
    std::vector<std::vector<std::pair<bool, std::size_t>>> choice(k + 1, std::vector<std::pair<bool, std::size_t>>(n + 1));
    for (std::size_t b = 0; b <= n; ++b) ps.table[0][b] = Magnitude::of(0);
    for (std::size_t a = 1; a <= k; ++a)
        for (std::size_t b = 1; b <= n; ++b) {
            Magnitude best = Magnitude::infinity();
            std::pair<bool, std::size_t> pick{true, a};
            for (std::size_t i = 1; i <= a; ++i) {
                Magnitude c = max(absorb_cost(prefix, i - 1, a - 1, budgets[b - 1]), ps.table[i - 1][b - 1]);
                if (c < best) {
                    best = c;
                    pick = {true, i};
                }
            }
            for (std::size_t i = 1; i <= b; ++i) {
                Magnitude c = max(whc_cost(sizes[a - 1], budgets, i - 1, b - 1), ps.table[a - 1][i - 1]);
                if (c < best) {
                    best = c;
                    pick = {false, i};
                }
            }
            ps.table[a][b] = best;
            choice[a][b] = pick;
        }
    ps.cost = ps.table[k][n];
    ps.feasible = !ps.cost.is_infinite();
    if (!ps.feasible) return ps;
    std::size_t a = k, b = n;
    while (a > 0) {
        auto [absorb, i] = choice[a][b];
        if (absorb) {
            ps.steps.push_back({PackStep::Absorb, i - 1, a - 1, b - 1, b - 1});
            a = i - 1;
            b = b - 1;
        } else {
            ps.steps.push_back({PackStep::Whc, a - 1, a - 1, i - 1, b - 1});
            a = a - 1;
            b = i - 1;
        }
    }
    return ps;
}

Magnitude pack_cost(const std::vector<PackStep>& steps, const std::vector<Rational>& sizes,
                    const std::vector<Bandwidth>& budgets) {
    std::vector<Rational> prefix(sizes.size() + 1, 0);
    for (std::size_t j = 0; j < sizes.size(); ++j) prefix[j + 1] = prefix[j] + sizes[j];
    Magnitude out = Magnitude::of(0);
    for (const auto& st : steps) {
        if (st.kind == PackStep::Absorb) out = max(out, absorb_cost(prefix, st.key_first, st.key_last, budgets[st.node_last]));
        else out = max(out, whc_cost(sizes[st.key_last], budgets, st.node_first, st.node_last));
    }
    return out;
}

EqPlan pack_eqcp(std::size_t k, const Rational& n, const std::vector<Bandwidth>& w, const Rational& l) {
    EqPlan plan;
    if (l <= 0) return plan;
    std::vector<Bandwidth> rem = w;
    std::vector<bool> avail(w.size(), true);
    Rational need = n * n / (2 * l * l);
    for (std::size_t key = 0; key < k; ++key) {
        std::optional<std::size_t> j;
        for (std::size_t v = 0; v < rem.size(); ++v)
            if (avail[v] && (!j || rem[*j] < rem[v])) j = v;
        if (!j) return plan;
        if (rem[*j].is_infinite() || l * rem[*j].value() >= n) {
            plan.steps.push_back({key, {*j}, true});
            if (!rem[*j].is_infinite()) rem[*j] = Bandwidth(rem[*j].value() - n / l);
            if (!rem[*j].is_infinite() && rem[*j].value() <= 0) avail[*j] = false;
            continue;
        }
        std::vector<std::size_t> order;
        for (std::size_t v = 0; v < rem.size(); ++v)
            if (avail[v]) order.push_back(v);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[b] < rem[a]; });
        EqPlan::Step st{key, {}, false};
        Rational mass = 0;
        for (std::size_t v : order) {
            if (mass >= need) break;
            st.nodes.push_back(v);
            mass += rem[v].value() * rem[v].value();
        }
        if (mass < need) return plan;
        for (std::size_t v : st.nodes) avail[v] = false;
        std::sort(st.nodes.begin(), st.nodes.end());
        plan.steps.push_back(std::move(st));
    }
    plan.feasible = true;
    return plan;
}

JoinRun star_join(const Topology& t, const Distribution& d, std::uint64_t seed) {
    StarView sv = star_view(t, d);
    Relation rr = d.r_total() <= d.s_total() ? Relation::R : Relation::S;
    Relation ss = rr == Relation::R ? Relation::S : Relation::R;
    std::size_t R = std::min(d.r_total(), d.s_total()), S = std::max(d.r_total(), d.s_total()), N = d.total();
    JoinRun run;
    std::size_t arg = 0;
    for (std::size_t v = 1; v < sv.size(); ++v)
        if (sv.n(v) > sv.n(arg)) arg = v;
    Simulation sim(t, d);
    sim.begin_round();
    if (sv.size() == 0 || sv.n(arg) >= S) {
        if (sv.size() > 0) converge(sim, sv.nodes[arg]);
        std::tie(run.trace, run.state) = sim.take();
        run.strategy = "converge";
        return run;
    }
    const auto& lab = sim.labels();
    const auto& r_keys = lab.keys(rr);
    const auto& s_keys = lab.keys(ss);
    const auto& r_owner = lab.owner(rr);
    const auto& s_owner = lab.owner(ss);
    std::vector<std::set<NodeId>> dr(r_keys.size()), ds(s_keys.size());

    std::vector<NodeId> beta;
    for (std::size_t v = 0; v < sv.size(); ++v)
        if (std::min(sv.n(v), N - sv.n(v)) >= R) beta.push_back(sv.nodes[v]);
    for (auto& dst : dr) dst.insert(beta.begin(), beta.end());

    std::vector<Index> r_rest(r_keys.size()), s_rest;
    std::iota(r_rest.begin(), r_rest.end(), Index{0});
    for (std::size_t i = 0; i < s_keys.size(); ++i)
        if (d.n(s_owner[i]) <= R) s_rest.push_back(static_cast<Index>(i));

    Budgets budgets = star_budgets(t);
    Bandwidth w_total = total(budgets.w);
    Rational threshold = 0;
    if (!w_total.is_infinite()) {
        double log_m = std::log2(static_cast<double>(sv.size()));
        threshold = Rational(static_cast<double>(r_rest.size() + s_rest.size()) * log_m) / w_total.value();
    }
    // Degrees are taken in the small/large role order.
    KeyStats ks;
    ks.threshold = threshold;
    for (Index i : r_rest) ++ks.degree[r_keys[i]].r;
    for (Index i : s_rest) ++ks.degree[s_keys[i]].s;
    ks.total = r_rest.size() + s_rest.size();
    for (const auto& [k, deg] : ks.degree)
        if (sz(deg.r) > threshold || sz(deg.s) > threshold) ks.heavy.push_back(k);
    std::set<Key> heavy(ks.heavy.begin(), ks.heavy.end());

    HashFunction h = weighted_hash(t, seed);
    std::map<Key, std::vector<Index>> heavy_r, heavy_s;
    for (Index i : r_rest) {
        if (heavy.count(r_keys[i])) heavy_r[r_keys[i]].push_back(i);
        else dr[i].insert(h(r_keys[i]));
    }
    for (Index i : s_rest) {
        if (heavy.count(s_keys[i])) heavy_s[s_keys[i]].push_back(i);
        else ds[i].insert(h(s_keys[i]));
    }

    std::vector<VirtualKey> vkeys;
    for (Key k : ks.heavy)
        for (const auto& vk : split_skew(k, heavy_r[k].size(), heavy_s[k].size())) vkeys.push_back(vk);
    std::stable_sort(vkeys.begin(), vkeys.end(), [](const VirtualKey& a, const VirtualKey& b) {
        if (a.n() != b.n()) return a.n() < b.n();
        if (a.key != b.key) return a.key < b.key;
        return a.chunk < b.chunk;
    });
    std::vector<std::size_t> node_order(budgets.nodes.size());
    std::iota(node_order.begin(), node_order.end(), 0);
    std::stable_sort(node_order.begin(), node_order.end(),
                     [&](std::size_t a, std::size_t b) { return budgets.w[a] < budgets.w[b]; });
    std::vector<Rational> sizes;
    for (const auto& vk : vkeys) sizes.push_back(sz(vk.n()));
    std::vector<Bandwidth> ws;
    std::vector<NodeId> wnodes;
    for (std::size_t i : node_order) {
        ws.push_back(budgets.w[i]);
        wnodes.push_back(budgets.nodes[i]);
    }
    if (!vkeys.empty()) {
        PackStrategy ps = packcp(sizes, ws);
        if (!ps.feasible) throw std::logic_error("packing infeasible");
        for (const auto& st : ps.steps) {
            if (st.kind == PackStep::Absorb) {
                NodeId v = wnodes[st.node_last];
                for (std::size_t q = st.key_first; q <= st.key_last; ++q) {
                    const auto& vk = vkeys[q];
                    for (std::size_t i = 0; i < vk.r; ++i) dr[heavy_r[vk.key][vk.r_begin + i]].insert(v);
                    for (std::size_t i = 0; i < vk.s; ++i) ds[heavy_s[vk.key][vk.s_begin + i]].insert(v);
                }
                continue;
            }
            const auto& vk = vkeys[st.key_last];
            std::vector<NodeId> nodes(wnodes.begin() + st.node_first, wnodes.begin() + st.node_last + 1);
            std::vector<Bandwidth> nw(ws.begin() + st.node_first, ws.begin() + st.node_last + 1);
            UnequalPlan up = unequal_plan(static_cast<std::int64_t>(vk.r), static_cast<std::int64_t>(vk.s), nodes, nw);
            auto rows = grid_spans(up.plan.regions, true, vk.r);
            auto cols = grid_spans(up.plan.regions, false, vk.s);
            for (std::size_t i = 0; i < vk.r; ++i)
                dr[heavy_r[vk.key][vk.r_begin + i]].insert(rows[i].begin(), rows[i].end());
            for (std::size_t i = 0; i < vk.s; ++i)
                ds[heavy_s[vk.key][vk.s_begin + i]].insert(cols[i].begin(), cols[i].end());
        }
    }
    Batch b;
    for (std::size_t i = 0; i < dr.size(); ++i)
        if (!dr[i].empty()) b.add(r_owner[i], {dr[i].begin(), dr[i].end()}, rr, static_cast<Index>(i));
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (!ds[i].empty()) b.add(s_owner[i], {ds[i].begin(), ds[i].end()}, ss, static_cast<Index>(i));
    b.flush(sim);
    std::tie(run.trace, run.state) = sim.take();
    run.strategy = ks.heavy.empty() ? "hash" : "hash+packcp";
    run.stats = std::move(ks);
    return run;
}

}  // namespace tamp

#include "tamp/bounds.hpp"

#include "tamp/asymstar.hpp"
#include "tamp/star.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tamp {

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::IntersectTree: return "intersect_tree";
        case BoundKind::CartesianCut: return "cartesian_cut";
        case BoundKind::CartesianCover: return "cartesian_cover";
        case BoundKind::Sorting: return "sorting";
        case BoundKind::JoinStar: return "join_star";
        case BoundKind::CpUnequal: return "cp_unequal";
        case BoundKind::AsymSendingFree: return "asym_sending_free";
        case BoundKind::AsymReceivingFree: return "asym_receiving_free";
        case BoundKind::AsymGeneral: return "asym_general";
    }
    return "unknown";
}

namespace {

Rational sz(std::size_t n) { return Rational(static_cast<unsigned long long>(n)); }

std::string edge_name(const Topology& t, EdgeId e) {
    return "(" + t.name(t.edge(e).from) + "," + t.name(t.edge(e).to) + ")";
}

std::string names(const Topology& t, const std::vector<NodeId>& vs) {
    std::string out = "{";
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? "," : "") + t.name(vs[i]);
    return out + "}";
}

void require_tree(const Topology& t) {
    if (!t.skeleton_is_tree()) throw std::invalid_argument("topology skeleton is not a tree");
}

// max_e term(minus, plus) / w_e over every directed edge.
template <class Term>
BoundReport max_cut(const Topology& t, const Distribution& d, BoundKind kind, Term term) {
    require_tree(t);
    TreeIndex idx(t);
    auto sizes = d.sizes();
    BoundReport rep;
    rep.kind = kind;
    Rational best = 0;
    for (EdgeId e = 0; e < t.edge_count(); ++e) {
        auto [minus, plus] = idx.side_sums(e, sizes);
        Rational v = ratio(term(minus, plus), t.edge(e).bw);
        if (!rep.edge || v > best) {
            best = v;
            rep.edge = e;
        }
    }
    rep.value = Magnitude::of(best);
    if (rep.edge) rep.witness = "edge " + edge_name(t, *rep.edge);
    return rep;
}

}  // namespace

BoundReport lb_intersect_tree(const Topology& t, const Distribution& d) {
    Rational r = sz(d.r_total()), s = sz(d.s_total());
    return max_cut(t, d, BoundKind::IntersectTree, [&](const Rational& a, const Rational& b) {
        return std::min({r, s, a, b});
    });
}

BoundReport lb_cartesian_cut(const Topology& t, const Distribution& d) {
    return max_cut(t, d, BoundKind::CartesianCut, [](const Rational& a, const Rational& b) { return std::min(a, b); });
}

BoundReport lb_sorting(const Topology& t, const Distribution& d) {
    auto rep = lb_cartesian_cut(t, d);
    rep.kind = BoundKind::Sorting;
    return rep;
}

Bandwidth out_bandwidth(const Topology& t, const OrientedTree& ot, NodeId v) {
    if (!ot.parent[v]) throw std::invalid_argument("root has no outgoing edge");
    return t.bandwidth(v, *ot.parent[v]);
}

BoundReport lb_cartesian_cover(const Topology& t, const Distribution& d, const std::optional<Cover>& cover) {
    require_tree(t);
    BoundReport rep;
    rep.kind = BoundKind::CartesianCover;
    if (d.r_total() != d.s_total()) {
        rep.applicable = false;
        rep.note = "requires |R| = |S|";
        return rep;
    }
    OrientedTree ot = orient(t, d.sizes());
    if (t.is_compute(ot.root)) {
        rep.applicable = false;
        rep.note = "G-dagger is rooted at compute node " + t.name(ot.root) + "; no cover other than the root";
        return rep;
    }
    Rational n = sz(d.total());
    auto eval = [&](const Cover& c) -> Magnitude {
        Rational sum = 0;
        for (NodeId v : c) {
            Bandwidth w = out_bandwidth(t, ot, v);
            if (w.is_infinite()) return Magnitude::of(0);
            sum += w.value() * w.value();
        }
        return Magnitude::sqrt_of(n * n / sum);
    };
    std::vector<Cover> covers;
    if (cover) {
        if (!is_cover(ot, *cover)) throw std::invalid_argument("not a cover of G-dagger");
        if (*cover == Cover{ot.root}) throw std::invalid_argument("the root cover gives no bound");
        covers.push_back(*cover);
    } else {
        for (auto& c : enumerate_minimal_covers(ot))
            if (c != Cover{ot.root}) covers.push_back(c);
    }
    bool first = true;
    for (const auto& c : covers) {
        Magnitude v = eval(c);
        if (first || v > rep.value) {
            rep.value = v;
            rep.nodes = c;
            first = false;
        }
    }
    rep.witness = "cover " + names(t, rep.nodes);
    return rep;
}

BoundReport lb_join_star(const Topology& t, const Distribution& d0) {
    Distribution d = d0.r_total() > d0.s_total() ? d0.swapped() : d0;
    StarView sv = star_view(t, d);
    std::size_t R = sv.r_total(), S = sv.s_total(), N = sv.total();
    BoundReport rep;
    rep.kind = BoundKind::JoinStar;
    Rational best = 0;
    std::size_t arg = 0, max_n = 0;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        Rational val = ratio(sz(std::min({R, sv.n(v), N - sv.n(v)})), sv.w(v));
        if (v == 0 || val > best) {
            best = val;
            arg = v;
        }
        max_n = std::max(max_n, sv.n(v));
    }
    rep.nodes = {sv.nodes[arg]};
    rep.witness = "node " + t.name(sv.nodes[arg]);
    if (max_n < S) {
        std::size_t n2 = R;
        for (std::size_t v = 0; v < sv.size(); ++v)
            if (sv.n(v) <= R) n2 += sv.s[v];
        std::vector<Bandwidth> ws;
        for (std::size_t v = 0; v < sv.size(); ++v) ws.push_back(sv.w(v));
        Rational part = ratio(sz(n2), total(ws));
        if (part > best) {
            best = part;
            rep.nodes.clear();
            rep.witness = "N'/sum w with N'=" + std::to_string(n2);
        }
    } else {
        rep.note = "load term omitted: max N_v >= |S|";
    }
    rep.value = Magnitude::of(best);
    return rep;
}

Rational balance_lhs(const Rational& c, const Rational& r, const std::vector<Bandwidth>& w) {
    Rational sum = 0;
    for (const auto& x : w) {
        if (x.is_infinite()) throw std::invalid_argument("balance_lhs needs finite bandwidths");
        Rational cw = c * x.value();
        sum += std::min(cw, r) * cw;
    }
    return sum;
}

namespace {

bool perfect_square(const Integer& x, Integer& root) {
    if (x < 0) return false;
    root = isqrt(x);
    return root * root == x;
}

// Rational root of the quadratic piece containing `c`, if it solves the equation exactly.
std::optional<Rational> exact_root(const Rational& c, const Rational& r, const Rational& s,
                                   const std::vector<Bandwidth>& w) {
    Rational a = 0, b = 0;
    for (const auto& x : w) {
        if (c * x.value() >= r) a += x.value();
        else b += x.value() * x.value();
    }
    Rational root;
    if (b == 0) {
        if (a == 0) return std::nullopt;
        root = s / a;
    } else {
        // b C^2 + r a C - r s = 0
        Rational disc = r * a * r * a + 4 * b * r * s;
        Integer num = numerator(disc), den = denominator(disc), rn, rd;
        if (!perfect_square(num, rn) || !perfect_square(den, rd)) return std::nullopt;
        root = (Rational(rn) / Rational(rd) - r * a) / (2 * b);
    }
    if (root < 0 || balance_lhs(root, r, w) != r * s) return std::nullopt;
    return root;
}

}  // namespace

BalanceRoot balance_root(const Rational& r, const Rational& s, const std::vector<Bandwidth>& w) {
    BalanceRoot res;
    res.exact = true;
    if (r <= 0 || s <= 0 || w.empty()) return res;
    Rational min_w = 0;
    bool first = true;
    for (const auto& x : w) {
        if (x.is_infinite()) return res;
        if (first || x.value() < min_w) min_w = x.value();
        first = false;
    }
    Rational lo = 0, hi = std::max(r, s) / min_w, target = r * s;
    Rational eps = Rational(1) / Rational(Integer(1) << 30);
    while (hi - lo > hi * eps) {
        Rational mid = (lo + hi) / 2;
        if (balance_lhs(mid, r, w) >= target) hi = mid;
        else lo = mid;
    }
    res.lo = lo;
    res.hi = hi;
    res.exact = false;
    for (const Rational& probe : {lo, hi}) {
        if (auto e = exact_root(probe, r, s, w)) {
            res.lo = res.hi = *e;
            res.exact = true;
            break;
        }
    }
    return res;
}

BoundReport lb_cp_unequal(const Topology& t, const Distribution& d0) {
    Distribution d = d0.r_total() > d0.s_total() ? d0.swapped() : d0;
    StarView sv = star_view(t, d);
    BoundReport rep;
    rep.kind = BoundKind::CpUnequal;
    std::size_t R = sv.r_total(), N = sv.total(), max_n = 0;
    rep.value = Magnitude::of(0);
    for (std::size_t v = 0; v < sv.size(); ++v) {
        max_n = std::max(max_n, sv.n(v));
        Magnitude c = Magnitude::of(ratio(sz(std::min({sv.n(v), N - sv.n(v), R})), sv.w(v)));
        if (!rep.edge || rep.value < c) {
            rep.value = c;
            rep.edge = t.edge_between(sv.nodes[v], sv.center);
            rep.witness = "edge (" + t.name(sv.nodes[v]) + "," + t.name(sv.center) + ")";
        }
    }
    if (2 * max_n > N) {
        rep.note = "packing term omitted: max N_v > N/2";
        return rep;
    }
    std::vector<Bandwidth> wa;
    Rational sa = 0, wb = 0;
    Bandwidth wmax = sv.w(0);
    bool beta_inf = false;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        const Bandwidth& w = sv.w(v);
        if (wmax < w) wmax = w;
        if (std::min(sv.n(v), N - sv.n(v)) < R) {
            wa.push_back(w);
            sa += sz(sv.s[v]);
            rep.nodes.push_back(sv.nodes[v]);
        } else {
            rep.nodes2.push_back(sv.nodes[v]);
            if (w.is_infinite()) beta_inf = true;
            else wb += w.value();
        }
    }
    Rational term = ratio(sz(sv.s_total()), wmax);
    if (!rep.nodes2.empty()) {
        Rational mid = beta_inf ? Rational(0) : Rational(sa / (2 * wb));
        term = std::min(term, mid);
    }
    Rational v_term = rep.nodes.empty() ? Rational(0) : balance_root(sz(R), sa, wa).lo;
    term = std::min(term, v_term);
    if (Magnitude::of(term) > rep.value) {
        rep.value = Magnitude::of(term);
        rep.edge.reset();
        rep.witness = "packing term with V_alpha=" + names(t, rep.nodes) + " V_beta=" + names(t, rep.nodes2);
    }
    return rep;
}

namespace {

struct AsymInput {
    StarView sv;
    std::size_t R = 0, S = 0;
};

Rational max_or_zero(const std::vector<Rational>& xs) {
    Rational m = 0;
    for (const auto& x : xs) m = std::max(m, x);
    return m;
}

// max_{u != v} a_u for every v.
std::vector<Rational> max_excluding(const std::vector<Rational>& a) {
    std::size_t n = a.size();
    std::vector<Rational> pre(n + 1, 0), suf(n + 1, 0), out(n);
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = std::max(pre[i], a[i]);
    for (std::size_t i = n; i-- > 0;) suf[i] = std::max(suf[i + 1], a[i]);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(pre[i], suf[i + 1]);
    return out;
}

// Value of the bound at a given (alpha, beta) membership.
Rational asym_value(const AsymInput& in, AsymVariant variant, const std::vector<bool>& alpha,
                    const std::vector<bool>& beta) {
    const StarView& sv = in.sv;
    std::size_t n = sv.size();
    if (variant == AsymVariant::SendingFree) {
        Bandwidth W = total(sv.down);
        Rational head = 0;
        std::size_t moved = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (!alpha[v]) head = std::max(head, ratio(sz(in.S - sv.s[v]), sv.down[v]));
            if (!beta[v]) head = std::max(head, ratio(sz(in.R - sv.r[v]), sv.down[v]));
            if (alpha[v]) moved += sv.r[v];
            if (beta[v]) moved += sv.s[v];
        }
        return head + ratio(sz(moved), W);
    }
    Bandwidth W = total(sv.down);
    std::vector<Rational> ru, su;
    for (std::size_t v = 0; v < n; ++v) {
        ru.push_back(ratio(sz(sv.r[v]), sv.up[v]));
        su.push_back(ratio(sz(sv.s[v]), sv.up[v]));
    }
    auto rx = max_excluding(ru), sx = max_excluding(su);
    Rational m = 0;
    std::size_t moved = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (alpha[v]) m = std::max(m, ru[v]);
        else m = std::max({m, ratio(sz(in.S - sv.s[v]), sv.down[v]), sx[v]});
        if (beta[v]) m = std::max(m, su[v]);
        else m = std::max({m, ratio(sz(in.R - sv.r[v]), sv.down[v]), rx[v]});
        if (alpha[v]) moved += sv.r[v];
        if (beta[v]) moved += sv.s[v];
    }
    return std::max(m, ratio(sz(moved), W));
}

std::vector<bool> all_but(std::size_t n, std::optional<std::size_t> skip) {
    std::vector<bool> m(n, true);
    if (skip) m[*skip] = false;
    return m;
}

std::vector<NodeId> members(const StarView& sv, const std::vector<bool>& m) {
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < m.size(); ++v)
        if (m[v]) out.push_back(sv.nodes[v]);
    return out;
}

BoundKind asym_kind(AsymVariant v) {
    switch (v) {
        case AsymVariant::SendingFree: return BoundKind::AsymSendingFree;
        case AsymVariant::ReceivingFree: return BoundKind::AsymReceivingFree;
        default: return BoundKind::AsymGeneral;
    }
}

BoundReport receiving_free(const Topology& t, const StarView& sv) {
    BoundReport rep;
    rep.kind = BoundKind::AsymReceivingFree;
    std::vector<Rational> ru, su;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        ru.push_back(ratio(sz(sv.r[v]), sv.up[v]));
        su.push_back(ratio(sz(sv.s[v]), sv.up[v]));
    }
    auto rx = max_excluding(ru), sx = max_excluding(su);
    Rational best = 0;
    for (std::size_t v = 0; v < sv.size(); ++v) {
        Rational l = std::max(std::min(ru[v], sx[v]), std::min(su[v], rx[v]));
        if (v == 0 || l > best) {
            best = l;
            rep.nodes = {sv.nodes[v]};
        }
    }
    rep.value = Magnitude::of(best);
    rep.witness = "node " + names(t, rep.nodes);
    return rep;
}

struct Candidate {
    Rational value;
    std::vector<bool> alpha, beta;
};

// Case where alpha = V_C and beta ranges freely (swap roles for the mirror case).
Candidate full_side(const AsymInput& in, AsymVariant variant, bool alpha_full) {
    const StarView& sv = in.sv;
    std::size_t n = sv.size();
    const auto& full = alpha_full ? sv.r : sv.s;   // relation sent by everybody
    const auto& free = alpha_full ? sv.s : sv.r;
    std::size_t FULL = alpha_full ? in.R : in.S;
    Bandwidth W = total(sv.down);
    std::vector<bool> keep;  // X: nodes outside the free set
    Rational value;
    if (variant == AsymVariant::SendingFree) {
        std::vector<Rational> f, g;
        for (std::size_t v = 0; v < n; ++v) {
            f.push_back(ratio(sz(FULL - full[v]), sv.down[v]));
            g.push_back(ratio(sz(free[v]), W));
        }
        SplitResult x = opt_split(f, g);
        value = x.value + ratio(sz(FULL), W);
        keep.assign(n, false);
        for (auto i : x.chosen) keep[i] = true;
    } else {
        std::vector<Rational> fu, gu;
        for (std::size_t v = 0; v < n; ++v) fu.push_back(ratio(sz(full[v]), sv.up[v]));
        auto fx = max_excluding(fu);
        std::vector<Rational> f, g, h;
        for (std::size_t v = 0; v < n; ++v) {
            f.push_back(std::max(ratio(sz(FULL - full[v]), sv.down[v]), fx[v]));
            g.push_back(ratio(sz(free[v]), sv.up[v]));
            h.push_back(ratio(sz(free[v]), W));
        }
        SplitResult x = opt_split_bottleneck(f, g, h, ratio(sz(FULL), W));
        value = std::max(x.value, max_or_zero(fu));
        keep.assign(n, false);
        for (auto i : x.chosen) keep[i] = true;
    }
    std::vector<bool> freeset(n);
    for (std::size_t v = 0; v < n; ++v) freeset[v] = !keep[v];
    Candidate c{value, std::vector<bool>(n, true), freeset};
    if (!alpha_full) std::swap(c.alpha, c.beta);
    return c;
}

}  // namespace

BoundReport lb_asym_star(const Topology& t, const Distribution& d, AsymVariant variant) {
    AsymInput in{star_view(t, d), d.r_total(), d.s_total()};
    if (variant == AsymVariant::ReceivingFree) return receiving_free(t, in.sv);
    std::size_t n = in.sv.size();
    std::vector<Candidate> cands;
    for (std::size_t v = 0; v < n; ++v) {
        auto m = all_but(n, v);
        cands.push_back({asym_value(in, variant, m, m), m, m});
    }
    cands.push_back(full_side(in, variant, true));
    cands.push_back(full_side(in, variant, false));
    const Candidate* best = &cands[0];
    for (const auto& c : cands)
        if (c.value < best->value) best = &c;
    BoundReport rep;
    rep.kind = asym_kind(variant);
    rep.value = Magnitude::of(best->value);
    rep.nodes = members(in.sv, best->alpha);
    rep.nodes2 = members(in.sv, best->beta);
    rep.witness = "V_alpha=" + names(t, rep.nodes) + " V_beta=" + names(t, rep.nodes2);
    return rep;
}

BoundReport lb_asym_star_exhaustive(const Topology& t, const Distribution& d, AsymVariant variant) {
    AsymInput in{star_view(t, d), d.r_total(), d.s_total()};
    if (variant == AsymVariant::ReceivingFree) return receiving_free(t, in.sv);
    std::size_t n = in.sv.size();
    if (n > 12) throw std::invalid_argument("exhaustive bound limited to 12 compute nodes");
    std::optional<Candidate> best;
    auto consider = [&](const std::vector<bool>& a, const std::vector<bool>& b) {
        Rational v = asym_value(in, variant, a, b);
        if (!best || v < best->value) best = Candidate{v, a, b};
    };
    for (std::size_t v = 0; v < n; ++v) consider(all_but(n, v), all_but(n, v));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<bool> sub(n);
        for (std::size_t v = 0; v < n; ++v) sub[v] = mask >> v & 1;
        consider(all_but(n, std::nullopt), sub);
        consider(sub, all_but(n, std::nullopt));
    }
    BoundReport rep;
    rep.kind = asym_kind(variant);
    rep.value = Magnitude::of(best->value);
    rep.nodes = members(in.sv, best->alpha);
    rep.nodes2 = members(in.sv, best->beta);
    rep.witness = "V_alpha=" + names(t, rep.nodes) + " V_beta=" + names(t, rep.nodes2);
    return rep;
}

}  // namespace tamp

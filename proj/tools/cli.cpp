#include "cli.hpp"

#include "tamp/asymstar.hpp"
#include "tamp/bounds.hpp"
#include "tamp/cartesian.hpp"
#include "tamp/intersect.hpp"
#include "tamp/joinstar.hpp"
#include "tamp/sortnet.hpp"
#include "tamp/star.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tamp::cli {

using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string position(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": syntax error at " + position(text, e.byte > 0 ? e.byte - 1 : 0));
    }
}

std::string scalar_text(const json& j, const std::string& what) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number()) return j.dump();
    throw ConfigError(what + ": expected a number or string");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::size_t to_count(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(what + ": bad count '" + s + "'");
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Topology parse_topology(const std::string& text) {
    json j = parse_json(text, "topology");
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) throw ConfigError("topology: needs nodes and edges");
    Topology t;
    bool symmetric = j.value("symmetric", false);
    try {
        for (const auto& n : j.at("nodes")) {
            std::string id = scalar_text(n.at("id"), "node id");
            bool compute = n.value("compute", false);
            t.add_node(id, compute ? NodeKind::Compute : NodeKind::Router);
        }
        for (const auto& e : j.at("edges")) {
            NodeId a = t.node_by_name(scalar_text(e.at("from"), "edge from"));
            NodeId b = t.node_by_name(scalar_text(e.at("to"), "edge to"));
            Bandwidth bw = parse_bandwidth(scalar_text(e.at("bw"), "edge bw"));
            if (symmetric) t.add_link(a, b, bw);
            else t.add_edge(a, b, bw);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
    if (symmetric && !t.check_symmetric()) throw ConfigError("topology: declared symmetric but edges disagree");
    t.set_symmetric(t.check_symmetric());
    if (!t.skeleton_is_tree()) throw ConfigError("topology: skeleton is not a tree");
    return t;
}

Topology load_topology(const std::string& spec) {
    if (spec.rfind("star:", 0) == 0) {
        std::vector<std::pair<Bandwidth, Bandwidth>> ud;
        try {
            for (const auto& part : split(spec.substr(5), ',')) {
                auto slash = part.find('/');
                if (slash == std::string::npos) ud.emplace_back(parse_bandwidth(part), parse_bandwidth(part));
                else ud.emplace_back(parse_bandwidth(part.substr(0, slash)), parse_bandwidth(part.substr(slash + 1)));
            }
            return build_star(ud);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("topology spec: ") + e.what());
        }
    }
    return parse_topology(read_file(spec));
}

Distribution parse_distribution(const Topology& t, const std::string& text) {
    json j = parse_json(text, "distribution");
    if (!j.is_object() || !j.contains("nodes")) throw ConfigError("distribution: needs nodes");
    Distribution d = Distribution::empty(t);
    std::vector<std::pair<std::vector<Key>*, std::size_t>> counted;
    Key next = 0;
    try {
        for (const auto& n : j.at("nodes")) {
            std::string name = scalar_text(n.at("node"), "node");
            auto id = t.find_node(name);
            if (!id) throw ConfigError("distribution: unknown node " + name);
            if (!t.is_compute(*id)) throw ConfigError("distribution: router " + name + " cannot hold data");
            for (const char* rel : {"r", "s"}) {
                if (!n.contains(rel)) continue;
                auto& dst = rel[0] == 'r' ? d.r[*id] : d.s[*id];
                const auto& v = n.at(rel);
                if (v.is_array()) {
                    for (const auto& k : v) {
                        dst.push_back(k.get<Key>());
                        next = std::max(next, dst.back() + 1);
                    }
                } else {
                    counted.emplace_back(&dst, v.get<std::size_t>());
                }
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("distribution: ") + e.what());
    }
    for (auto& [dst, count] : counted)
        for (std::size_t i = 0; i < count; ++i) dst->push_back(next++);
    return d;
}

bool is_generator(const std::string& spec) { return spec.rfind("gen:", 0) == 0; }

Distribution load_distribution(const Topology& t, const std::string& spec, std::uint64_t seed) {
    if (!is_generator(spec)) return parse_distribution(t, read_file(spec));
    auto parts = split(spec.substr(4), ',');
    if (parts.empty()) throw ConfigError("generator: empty spec");
    std::string kind = parts[0], param;
    if (auto c = kind.find(':'); c != std::string::npos) {
        param = kind.substr(c + 1);
        kind = kind.substr(0, c);
    }
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw ConfigError("generator: expected key=value in '" + parts[i] + "'");
        kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
    }
    auto get = [&](const std::string& k, std::size_t fallback) {
        return kv.count(k) ? to_count(kv[k], "generator " + k) : fallback;
    };
    try {
        if (kind == "uniform") {
            std::size_t n = get("n", 0);
            std::size_t r = get("r", n / 2), s = get("s", n - n / 2);
            std::optional<Key> space;
            if (kv.count("space")) space = static_cast<Key>(get("space", 0));
            return uniform_instance(t, r, s, seed, space);
        }
        if (kind == "zipf") {
            double z = param.empty() ? 1.0 : std::stod(param);
            std::size_t n = get("n", 0);
            std::size_t r = get("r", n / 2), s = get("s", n - n / 2);
            return skewed_join_instance(t, r, s, z, seed, get("domain", 0));
        }
        if (kind == "adversarial") {
            std::size_t n = get("n", 0);
            auto order = valid_ordering(t, 0);
            std::vector<std::size_t> sizes(order.size(), n / std::max<std::size_t>(order.size(), 1));
            for (std::size_t i = 0; i < n % std::max<std::size_t>(order.size(), 1); ++i) ++sizes[i];
            return adversarial_sort_instance(order, sizes, t.node_count());
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
    throw ConfigError("generator: unknown kind '" + kind + "'");
}

Task parse_task(const std::string& name) {
    if (name == "intersect") return Task::Intersect;
    if (name == "cartesian") return Task::Cartesian;
    if (name == "join") return Task::Join;
    throw ConfigError("task '" + name + "' has no oracle");
}

namespace {

struct Outcome {
    TrafficTrace trace;
    Verdict verdict;
    BoundReport lb;
};

std::string default_algo(const std::string& task, const Topology& t) {
    bool star = is_star(t);
    if (task == "intersect") return star ? "star" : "tree";
    if (task == "cartesian") return star ? "star" : "tree";
    if (task == "sort") return "wts";
    if (task == "join") return "star";
    throw ConfigError("unknown task '" + task + "'");
}

void require_star(const Topology& t, const std::string& algo) {
    if (!is_star(t)) throw ConfigError("algorithm '" + algo + "' needs a star topology");
}

void require_symmetric(const Topology& t, const std::string& algo) {
    if (!t.check_symmetric()) throw ConfigError("algorithm '" + algo + "' needs a symmetric topology");
}

Outcome execute(const std::string& task, const std::string& algo, const Topology& t, const Distribution& d,
                std::uint64_t seed) {
    Outcome out;
    if (task == "intersect") {
        if (algo == "star" || algo == "tree") {
            require_symmetric(t, algo);
            if (algo == "star") require_star(t, algo);
            auto run = algo == "star" ? star_intersect(t, d, seed) : tree_intersect(t, d, seed);
            out.trace = run.trace;
            out.verdict = verify_intersection(run.state, d);
            out.lb = lb_intersect_tree(t, d);
            return out;
        }
        if (algo == "sf" || algo == "rf" || algo == "asym") {
            require_star(t, algo);
            AsymRun run = algo == "sf" ? sf_star_intersect(t, d, seed)
                        : algo == "rf" ? rf_star_intersect(t, d)
                                       : asym_star_intersect(t, d, seed);
            out.trace = run.trace;
            out.verdict = verify_intersection(run.state, d);
            AsymVariant v = algo == "sf" ? AsymVariant::SendingFree
                          : algo == "rf" ? AsymVariant::ReceivingFree
                                         : AsymVariant::General;
            out.lb = lb_asym_star(t, d, v);
            return out;
        }
    } else if (task == "cartesian") {
        if (algo == "star" || algo == "tree" || algo == "unequal" || algo == "general") {
            require_symmetric(t, algo);
            if (algo != "tree") require_star(t, algo);
            CartesianRun run = algo == "star"      ? star_cartesian(t, d)
                             : algo == "tree"      ? tree_cartesian(t, d)
                             : algo == "unequal"   ? whc_unequal(t, d)
                                                   : generalized_star_cartesian(t, d);
            out.trace = run.trace;
            out.verdict = verify_cartesian(run.state, d);
            if (algo == "unequal" || algo == "general") {
                out.lb = lb_cp_unequal(t, d);
            } else {
                out.lb = lb_cartesian_cut(t, d);
                BoundReport cov = lb_cartesian_cover(t, d);
                if (cov.applicable && out.lb.value < cov.value) out.lb = cov;
            }
            return out;
        }
    } else if (task == "sort") {
        if (algo == "wts" || algo == "terasort" || algo == "converge") {
            require_symmetric(t, algo);
            SortRun run = algo == "wts" ? wts_sort(t, d, seed) : algo == "terasort" ? terasort(t, d, seed) : send_all_to_max(t, d);
            out.trace = run.trace;
            out.verdict = verify_sorted(run.state, d, run.order);
            out.lb = lb_sorting(t, d);
            return out;
        }
    } else if (task == "join") {
        if (algo == "star" || algo == "hash") {
            require_symmetric(t, algo);
            require_star(t, algo);
            JoinRun run = algo == "star" ? star_join(t, d, seed) : weighted_hash_join(t, d, seed);
            out.trace = run.trace;
            out.verdict = verify_join(run.state, d);
            out.lb = lb_join_star(t, d);
            return out;
        }
    } else {
        throw ConfigError("unknown task '" + task + "'");
    }
    throw ConfigError("algorithm '" + algo + "' is not available for task '" + task + "'");
}

std::string ratio_text(const Rational& cost, const Magnitude& lb) {
    if (lb.is_infinite()) return "0";
    if (lb.square() == 0) return cost == 0 ? "nan" : "inf";
    return render(Magnitude::sqrt_of(cost * cost / lb.square()));
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw ConfigError("trials must be positive");
    if (cfg.width_bits == 0) throw ConfigError("width-bits must be positive");
    Topology t = load_topology(cfg.topo);
    std::string algo = cfg.algo.empty() ? default_algo(cfg.task, t) : cfg.algo;
    std::optional<Distribution> fixed;
    if (!is_generator(cfg.dist)) fixed = load_distribution(t, cfg.dist, cfg.seed);
    std::ostringstream csv, trace;
    csv << "trial,task,algo,rounds,tuple_cost,bit_cost,lb_value,lb_kind,ratio,seed";
    if (cfg.oracle) csv << ",oracle_opt,lb_scaled,sandwich";
    csv << "\n";
    trace << "trial,round,edge_from,edge_to,tuples\n";
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        std::uint64_t seed = cfg.seed + trial;
        Distribution d = fixed ? *fixed : load_distribution(t, cfg.dist, seed);
        Outcome out;
        try {
            out = execute(cfg.task, algo, t, d, seed);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        } catch (const TopologyError& e) {
            throw ConfigError(e.what());
        }
        if (!out.verdict) throw VerifyError("trial " + std::to_string(trial) + ": " + out.verdict.witness);
        out.trace.element_width_bits = cfg.width_bits;
        CostReport c = cost(out.trace, t, seed);
        csv << trial << ',' << cfg.task << ',' << algo << ',' << c.rounds << ','
            << (c.infinite ? "inf" : render(c.tuple_cost)) << ',' << (c.infinite ? "inf" : render(c.bit_cost)) << ','
            << render(out.lb.value) << ',' << to_string(out.lb.kind) << ',' << ratio_text(c.tuple_cost, out.lb.value)
            << ',' << seed;
        if (cfg.oracle) {
            bool small = t.compute_nodes().size() <= 3 && d.total() <= 8 && cfg.task != "sort";
            if (small) {
                SandwichReport s = sandwich_check(t, d, parse_task(cfg.task), seed);
                csv << ',' << render(s.opt) << ',' << render(s.lb_scaled) << ',' << (s.ok ? "ok" : "violated");
            } else {
                csv << ",,,";
            }
        }
        csv << "\n";
        for (std::size_t r = 0; r < out.trace.rounds.size(); ++r)
            for (EdgeId e = 0; e < out.trace.rounds[r].size(); ++e)
                if (out.trace.rounds[r][e] > 0)
                    trace << trial << ',' << r + 1 << ',' << csv_field(t.name(t.edge(e).from)) << ','
                          << csv_field(t.name(t.edge(e).to)) << ',' << out.trace.rounds[r][e] << "\n";
    }
    return {csv.str(), trace.str()};
}

std::string bounds_table(const Topology& t, const Distribution& d) {
    std::vector<BoundReport> reps;
    auto attempt = [&](auto&& f) {
        try {
            reps.push_back(f());
        } catch (const std::exception&) {
        }
    };
    bool sym = t.check_symmetric();
    if (sym) {
        attempt([&] { return lb_intersect_tree(t, d); });
        attempt([&] { return lb_cartesian_cut(t, d); });
        attempt([&] { return lb_cartesian_cover(t, d); });
        attempt([&] { return lb_sorting(t, d); });
    }
    if (is_star(t)) {
        if (sym) {
            attempt([&] { return lb_join_star(t, d); });
            attempt([&] { return lb_cp_unequal(t, d); });
        }
        attempt([&] { return lb_asym_star(t, d, AsymVariant::General); });
        attempt([&] { return lb_asym_star(t, d, AsymVariant::SendingFree); });
        attempt([&] { return lb_asym_star(t, d, AsymVariant::ReceivingFree); });
    }
    std::ostringstream out;
    out << "bound,applicable,value,edge,nodes,witness\n";
    for (const auto& r : reps) {
        std::string edge = r.edge ? t.name(t.edge(*r.edge).from) + "->" + t.name(t.edge(*r.edge).to) : "";
        std::string nodes;
        for (NodeId v : r.nodes) nodes += (nodes.empty() ? "" : " ") + t.name(v);
        out << to_string(r.kind) << ',' << (r.applicable ? "yes" : "no") << ',' << render(r.value) << ','
            << csv_field(edge) << ',' << csv_field(nodes) << ',' << csv_field(r.applicable ? r.witness : r.note) << "\n";
    }
    return out.str();
}

std::string validate_report(const std::string& topo_spec, const std::optional<std::string>& dist_spec,
                            const std::string& task, std::uint64_t seed, bool* ok) {
    std::ostringstream out;
    *ok = true;
    Topology t = load_topology(topo_spec);
    out << "topology: " << t.node_count() << " nodes, " << t.compute_nodes().size() << " compute, " << t.edge_count()
        << " edges, " << (t.check_symmetric() ? "symmetric" : "asymmetric") << "\n";
    if (t.check_symmetric()) {
        NormalizeReport rep;
        normalize_tree(t, &rep);
        for (const auto& n : rep.fused) out << "normalize: fused degree-2 node " << n << "\n";
        for (const auto& n : rep.leafed) out << "normalize: internal compute node " << n << " given a leaf\n";
        for (const auto& n : rep.pruned) out << "normalize: pruned router leaf " << n << "\n";
        if (is_normalized_tree(t)) out << "normalize: already normalized\n";
    }
    if (!dist_spec) return out.str();
    Distribution d = load_distribution(t, *dist_spec, seed);
    out << "distribution: |R|=" << d.r_total() << " |S|=" << d.s_total() << "\n";
    if (task != "join") {
        for (int rel = 0; rel < 2; ++rel) {
            std::map<Key, NodeId> seen;
            for (NodeId v : t.compute_nodes())
                for (Key k : rel == 0 ? d.r[v] : d.s[v]) {
                    auto [it, fresh] = seen.emplace(k, v);
                    if (!fresh) {
                        out << "error: key " << k << " of " << (rel == 0 ? "R" : "S") << " placed at " << t.name(it->second)
                            << " and " << t.name(v) << "\n";
                        *ok = false;
                    }
                }
        }
    }
    if (d.total() == 0) out << "warning: empty instance\n";
    for (NodeId v : t.compute_nodes())
        if (d.n(v) == 0) out << "warning: compute node " << t.name(v) << " holds no data\n";
    return out.str();
}

std::string oracle_report(const Topology& t, const Distribution& d, Task task, std::uint64_t seed,
                          std::uint64_t max_states) {
    OracleResult res = opt_one_round(t, d, task, max_states);
    std::ostringstream out;
    out << "task,opt_cost,states\n" << to_string(task) << ',' << render(res.opt_cost) << ',' << res.states << "\n";
    Labeling lab(d);
    out << "relation,tuple,key,owner,dests\n";
    for (int rel = 0; rel < 2; ++rel) {
        const auto& dests = rel == 0 ? res.r_dests : res.s_dests;
        for (std::size_t i = 0; i < dests.size(); ++i) {
            std::string ds;
            for (NodeId v : dests[i]) ds += (ds.empty() ? "" : " ") + t.name(v);
            out << (rel == 0 ? "R" : "S") << ',' << i << ',' << (rel == 0 ? lab.r_keys[i] : lab.s_keys[i]) << ','
                << t.name(rel == 0 ? lab.r_owner[i] : lab.s_owner[i]) << ',' << csv_field(ds) << "\n";
        }
    }
    if (t.compute_nodes().size() <= 3 && d.total() <= 8) {
        SandwichReport s = sandwich_check(t, d, task, seed);
        out << "lb,lb_scaled,opt,algorithm,algorithm_cost,sandwich\n"
            << render(s.lb) << ',' << render(s.lb_scaled) << ',' << render(s.opt) << ',' << s.algo << ','
            << render(s.alg) << ',' << (s.ok ? "ok" : "violated") << "\n";
    }
    return out.str();
}

}  // namespace tamp::cli

#pragma once

#include <nar/arbitrage.hpp>
#include <nar/engine.hpp>

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace nar {

using nlohmann::json;

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline Rational json_rational(const json& j, const std::string& where) {
    if (!j.is_string())
        throw IoError(where + ": rationals must be strings like \"3/4\" or \"0.25\"");
    try {
        return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
        throw IoError(where + ": " + e.what());
    }
}

inline RatVector json_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw IoError(where + ": expected an array");
    RatVector v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(json_rational(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

inline json vector_json(const RatVector& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(x.get_str());
    return out;
}

}  // namespace detail

// ----------------------------------------------------------------- models

inline MarketModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw IoError("model: top level must be an object");
    if (!doc.contains("version") || doc["version"] != 1)
        throw IoError("model: missing or unsupported version (expected 1)");
    const std::string kind = doc.value("kind", "");
    if (kind != "general" && kind != "bank")
        throw IoError("model.kind: expected \"general\" or \"bank\"");
    if (!doc.contains("horizon") || !doc["horizon"].is_number_integer())
        throw IoError("model.horizon: expected an integer");
    const int horizon = doc["horizon"].get<int>();
    if (!doc.contains("assets") || !doc["assets"].is_number_integer())
        throw IoError("model.assets: expected an integer");
    const int assets = doc["assets"].get<int>();
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        throw IoError("model.nodes: expected an array");

    std::vector<ScenarioTree::Node> nodes;
    std::vector<json> payloads;
    std::vector<std::string> ids;
    for (size_t i = 0; i < doc["nodes"].size(); ++i) {
        const json& nj = doc["nodes"][i];
        const std::string where = "model.nodes[" + std::to_string(i) + "]";
        ScenarioTree::Node n;
        if (!nj.contains("id") || !nj["id"].is_string()) throw IoError(where + ".id: expected a string");
        n.id = nj["id"].get<std::string>();
        for (const auto& seen : ids)
            if (seen == n.id) throw IoError(where + ".id: duplicate id '" + n.id + "'");
        ids.push_back(n.id);
        if (!nj.contains("t") || !nj["t"].is_number_integer())
            throw IoError(where + ".t: expected an integer");
        n.t = nj["t"].get<int>();
        if (nj.contains("parent")) {
            const std::string pid = nj["parent"].get<std::string>();
            n.parent = -1;
            for (size_t k = 0; k < ids.size(); ++k)
                if (ids[k] == pid) n.parent = static_cast<int>(k);
            if (n.parent < 0) throw IoError(where + ".parent: unknown id '" + pid + "' (parents must precede children)");
        }
        n.prob = detail::json_rational(nj.contains("prob") ? nj["prob"] : json(), where + ".prob");
        nodes.push_back(std::move(n));
        payloads.push_back(nj);
    }

    try {
        ScenarioTree tree(std::move(nodes), horizon);
        if (kind == "bank") {
            std::vector<std::pair<RatVector, RatVector>> ba;
            for (size_t i = 0; i < payloads.size(); ++i) {
                const std::string where = "model.nodes[" + std::to_string(i) + "].prices";
                if (!payloads[i].contains("prices")) throw IoError(where + ": missing");
                const json& pj = payloads[i]["prices"];
                RatVector bid = detail::json_vector(pj.value("bid", json()), where + ".bid");
                RatVector ask = detail::json_vector(pj.value("ask", json()), where + ".ask");
                if (static_cast<int>(bid.size()) != assets || static_cast<int>(ask.size()) != assets)
                    throw IoError(where + ": expected " + std::to_string(assets) + " entries");
                ba.emplace_back(std::move(bid), std::move(ask));
            }
            return make_bank_model(std::move(tree), std::move(ba));
        }
        std::vector<RatMatrix> pis;
        for (size_t i = 0; i < payloads.size(); ++i) {
            const std::string where = "model.nodes[" + std::to_string(i) + "].matrix";
            if (!payloads[i].contains("matrix") || !payloads[i]["matrix"].is_array())
                throw IoError(where + ": expected an array of rows");
            const json& mj = payloads[i]["matrix"];
            if (static_cast<int>(mj.size()) != assets) throw IoError(where + ": expected " + std::to_string(assets) + " rows");
            RatMatrix pi(assets, assets);
            for (int r = 0; r < assets; ++r) {
                RatVector row = detail::json_vector(mj[r], where + "[" + std::to_string(r) + "]");
                if (static_cast<int>(row.size()) != assets)
                    throw IoError(where + "[" + std::to_string(r) + "]: expected " + std::to_string(assets) + " entries");
                pi.set_row(r, row);
            }
            pis.push_back(std::move(pi));
        }
        return make_general_model(std::move(tree), std::move(pis));
    } catch (const MarketError& e) {
        throw IoError(std::string("model: ") + e.what());
    } catch (const std::domain_error& e) {
        throw IoError(std::string("model: ") + e.what());
    }
}

inline json model_to_json(const MarketModel& m) {
    json doc;
    doc["version"] = 1;
    doc["kind"] = m.kind == MarketKind::BankAccount ? "bank" : "general";
    doc["horizon"] = m.tree.horizon();
    doc["assets"] = m.assets;
    doc["nodes"] = json::array();
    for (int v = 0; v < m.tree.size(); ++v) {
        const auto& n = m.tree.node(v);
        json nj;
        nj["id"] = n.id;
        nj["t"] = n.t;
        if (n.parent >= 0) nj["parent"] = m.tree.node(n.parent).id;
        nj["prob"] = n.prob.get_str();
        if (m.kind == MarketKind::BankAccount) {
            nj["prices"] = {{"bid", detail::vector_json(m.prices[v].bid)},
                            {"ask", detail::vector_json(m.prices[v].ask)}};
        } else {
            json rows = json::array();
            for (int r = 0; r < m.assets; ++r) rows.push_back(detail::vector_json(m.matrices[v].pi.row(r)));
            nj["matrix"] = rows;
        }
        doc["nodes"].push_back(std::move(nj));
    }
    return doc;
}

inline MarketModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

// ----------------------------------------------------------- certificates

inline json cone_json(const PolyhedralCone& c) {
    if (c.is_empty()) return json("empty");
    json g = json::array();
    for (const auto& r : c.generators()) g.push_back(detail::vector_json(r));
    return json{{"generators", g}};
}

inline json polytope_json(const Polytope& p) {
    if (p.is_empty()) return json("empty");
    json vs = json::array();
    for (const auto& v : p.vertices()) vs.push_back(detail::vector_json(v));
    return json{{"vertices", vs}};
}

inline json trace_json(const MarketModel& m, const ConeTrace* ct, const BankTrace* bt) {
    json out = json::array();
    for (int v = 0; v < m.tree.size(); ++v) {
        json nj;
        nj["id"] = m.tree.node(v).id;
        nj["t"] = m.tree.node(v).t;
        if (ct) {
            nj["W"] = cone_json(ct->W[v]);
            if (!m.tree.is_leaf(v)) nj["Y"] = cone_json(ct->Y[v]);
        }
        if (bt) {
            nj["V"] = polytope_json(bt->V[v]);
            if (!m.tree.is_leaf(v)) nj["X"] = polytope_json(bt->X[v]);
        }
        out.push_back(std::move(nj));
    }
    return out;
}

inline json certificate_json(const MarketModel& m, const ConeTrace* ct, const BankTrace* bt,
                             const ConsistentPriceProcess* cpp, const ArbitrageCertificate* arb) {
    const bool holds = ct ? ct->holds : bt->holds;
    json doc;
    doc["version"] = 1;
    doc["verdict"] = holds ? "hold" : "fail";
    doc["trace"] = trace_json(m, ct, bt);
    if (!holds) {
        json f;
        f["t"] = ct ? ct->failure_time : bt->failure_time;
        f["nodes"] = json::array();
        for (int v : ct ? ct->failure_nodes : bt->failure_nodes)
            f["nodes"].push_back(m.tree.node(v).id);
        doc["failure"] = std::move(f);
    }
    if (cpp) {
        json z;
        for (int v = 0; v < m.tree.size(); ++v) z[m.tree.node(v).id] = detail::vector_json(cpp->z[v]);
        doc["cpp"] = json{{"Z", std::move(z)}};
    }
    if (arb) {
        json a;
        a["n"] = arb->failure_time;
        a["A_n"] = json::array();
        for (int v : arb->failure_nodes) a["A_n"].push_back(m.tree.node(v).id);
        a["m"] = arb->adjust_time;
        a["B_m"] = json::array();
        for (int v : arb->adjust_nodes) a["B_m"].push_back(m.tree.node(v).id);
        a["lambda"] = arb->lambda.get_str();
        json inc, eps, th;
        for (int v = 0; v < m.tree.size(); ++v) {
            const std::string& id = m.tree.node(v).id;
            inc[id] = detail::vector_json(arb->increments[v]);
            eps[id] = detail::vector_json(arb->epsilon[v]);
            th[id] = detail::vector_json(arb->theta[v]);
        }
        a["increments"] = std::move(inc);
        a["epsilon"] = std::move(eps);
        a["theta"] = std::move(th);
        a["tightened"] = model_to_json(arb->tightened);
        a["valid_for_original"] = arb->valid_for_original;
        doc["arbitrage"] = std::move(a);
    }
    return doc;
}

/// Re-checks every invariant of a certificate against a model with exact
/// arithmetic; returns human-readable violations (empty = certificate valid).
inline std::vector<std::string> verify_certificate(const json& cert, const MarketModel& m) {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    try {
        if (!cert.contains("version") || cert["version"] != 1) {
            bad.push_back("certificate version must be 1");
            return bad;
        }
        const std::string verdict = cert.value("verdict", "");
        check(verdict == "hold" || verdict == "fail", "verdict must be \"hold\" or \"fail\"");

        // the trace is re-derivable: recompute and compare where present
        std::optional<ConeTrace> ct;
        std::optional<BankTrace> bt;
        if (cert.contains("trace") && cert["trace"].is_array() && !cert["trace"].empty()) {
            if (cert["trace"][0].contains("W")) ct = run_recursion(m);
            if (cert["trace"][0].contains("V")) {
                if (m.kind != MarketKind::BankAccount)
                    bad.push_back("trace carries box values but the model is not bank-account kind");
                else
                    bt = run_recursion_bank(m);
            }
            for (const auto& nj : cert["trace"]) {
                const int v = m.tree.find(nj.value("id", ""));
                if (ct && nj.contains("W")) {
                    PolyhedralCone w = nj["W"].is_string()
                                           ? PolyhedralCone::empty_value(m.assets)
                                           : PolyhedralCone::from_generators(
                                                 [&] {
                                                     std::vector<RatVector> g;
                                                     for (const auto& gj : nj["W"]["generators"])
                                                         g.push_back(detail::json_vector(gj, "trace.W"));
                                                     return g;
                                                 }(),
                                                 m.assets);
                    check(equal(w, ct->W[v]), "trace W mismatch at node '" + nj.value("id", "") + "'");
                }
                if (bt && nj.contains("V")) {
                    Polytope pv = nj["V"].is_string()
                                      ? Polytope::empty_value(m.assets - 1)
                                      : Polytope::from_points(
                                            [&] {
                                                std::vector<RatVector> pts;
                                                for (const auto& gj : nj["V"]["vertices"])
                                                    pts.push_back(detail::json_vector(gj, "trace.V"));
                                                return pts;
                                            }(),
                                            m.assets - 1);
                    check(equal(pv, bt->V[v]), "trace V mismatch at node '" + nj.value("id", "") + "'");
                }
            }
            if (ct) check((verdict == "hold") == ct->holds, "verdict disagrees with the recursion");
            if (bt) check((verdict == "hold") == bt->holds, "verdict disagrees with the box recursion");
        }

        if (cert.contains("cpp")) {
            const json& zj = cert["cpp"]["Z"];
            std::vector<RatVector> z(m.tree.size());
            for (int v = 0; v < m.tree.size(); ++v) {
                const std::string& id = m.tree.node(v).id;
                if (!zj.contains(id)) {
                    bad.push_back("cpp.Z missing node '" + id + "'");
                    return bad;
                }
                z[v] = detail::json_vector(zj[id], "cpp.Z['" + id + "']");
            }
            for (int v = 0; v < m.tree.size(); ++v) {
                if (!m.tree.is_leaf(v)) {
                    RatVector e(m.assets, Rational(0));
                    for (int c : m.tree.children(v)) e = add(e, scale(m.tree.conditional_prob(c), z[c]));
                    check(e == z[v], "martingale identity fails at node '" + m.tree.node(v).id + "'");
                }
                check(in_relative_interior(m.solvency_dual[v], z[v]),
                      "Z is not strictly consistent at node '" + m.tree.node(v).id + "'");
            }
            Rational s = 0;
            for (const auto& x : z[m.tree.root()]) s += x;
            check(s == 1, "Z at the root must be normalized to sum 1");
        }

        if (cert.contains("arbitrage")) {
            const json& a = cert["arbitrage"];
            MarketModel tightened = model_from_json(a["tightened"]);
            auto read_field = [&](const char* name) {
                std::vector<RatVector> out(m.tree.size());
                for (int v = 0; v < m.tree.size(); ++v)
                    out[v] = detail::json_vector(a[name][m.tree.node(v).id],
                                                 std::string("arbitrage.") + name);
                return out;
            };
            std::vector<RatVector> x = read_field("increments");
            std::vector<RatVector> eps = read_field("epsilon");
            std::vector<RatVector> theta = read_field("theta");
            const int mm = a.value("m", -1);
            const int n = a.value("n", -1);
            std::vector<char> in_bm(m.tree.size(), 0);
            for (const auto& id : a["B_m"]) in_bm[m.tree.find(id.get<std::string>())] = 1;

            for (int v = 0; v < m.tree.size(); ++v) {
                const auto& node = m.tree.node(v);
                RatVector prev = node.parent < 0 ? RatVector(m.assets, Rational(0)) : theta[node.parent];
                check(theta[v] == add(prev, add(x[v], eps[v])),
                      "theta does not telescope at node '" + node.id + "'");
                if (node.t < n)
                    check(is_zero(x[v]), "increments must vanish before the failure time at '" + node.id + "'");
                bool in_k = true;
                for (const auto& w : m.solvency_dual[v].generators())
                    if (dot(w, x[v]) > 0) in_k = false;
                check(in_k, "self-financing fails (x_t outside -K_t) at node '" + node.id + "'");
                bool in_kt = true;
                RatVector inc = add(x[v], eps[v]);
                for (const auto& w : tightened.solvency_dual[v].generators())
                    if (dot(w, inc) > 0) in_kt = false;
                check(in_kt, "self-financing fails for the tightened process at node '" + node.id + "'");
                if (a.value("valid_for_original", false)) {
                    bool in_orig = true;
                    for (const auto& w : m.solvency_dual[v].generators())
                        if (dot(w, inc) > 0) in_orig = false;
                    check(in_orig, "claimed validity for the original process fails at node '" + node.id + "'");
                }
                for (const auto& e : eps[v]) check(e >= 0, "epsilon must be nonnegative at '" + node.id + "'");
                if (node.t != mm || !in_bm[v])
                    check(is_zero(eps[v]), "epsilon must vanish off B_m at '" + node.id + "'");
            }
            bool eps_nonzero = false;
            for (int v = 0; v < m.tree.size(); ++v)
                if (in_bm[v] && !is_zero(eps[v])) eps_nonzero = true;
            check(eps_nonzero, "epsilon must be nonzero somewhere on B_m");
            for (int v = 0; v < m.tree.size(); ++v)
                for (int i = 0; i < m.assets; ++i)
                    for (int j = i + 1; j < m.assets; ++j) {
                        auto [lo, hi] = m.matrices[v].interval(i, j);
                        auto [tlo, thi] = tightened.matrices[v].interval(i, j);
                        check(lo == hi ? (tlo == lo && thi == hi) : (tlo > lo && thi < hi),
                              "tightened spreads must lie strictly inside the originals at '" +
                                  m.tree.node(v).id + "'");
                    }
            bool nonzero = false;
            for (int leaf : m.tree.leaves()) {
                for (const auto& c : theta[leaf])
                    check(c >= 0, "terminal payoff has a negative component at '" + m.tree.node(leaf).id + "'");
                if (!is_zero(theta[leaf])) nonzero = true;
            }
            check(nonzero, "terminal payoff must be nonzero on some leaf");
        } else if (cert.value("verdict", "") == "fail" && cert.contains("failure")) {
            ConeTrace tr = run_recursion(m);
            check(!tr.holds, "certificate reports failure but the recursion passes");
            if (!tr.holds) {
                check(cert["failure"].value("t", -2) == tr.failure_time, "failure time mismatch");
            }
        }
    } catch (const std::exception& e) {
        bad.push_back(std::string("malformed certificate: ") + e.what());
    }
    return bad;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return doc;
}

inline void save_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << doc.dump(2) << "\n";
}

}  // namespace nar

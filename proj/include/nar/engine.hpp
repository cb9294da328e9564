#pragma once

#include <nar/market.hpp>

#include <optional>
#include <thread>
#include <vector>

namespace nar {

/// Backward-recursion record. W at leaves equals K_T*; emptiness is
/// absorbing toward the root. Y is meaningful at internal nodes.
struct ConeTrace {
    bool holds = false;
    std::vector<PolyhedralCone> W;
    std::vector<PolyhedralCone> Y;
    int failure_time = -1;           // largest t with an empty node
    std::vector<int> failure_nodes;  // the nodes at that time
};

struct BankTrace {
    bool holds = false;
    std::vector<Polytope> V;
    std::vector<Polytope> X;
    int failure_time = -1;
    std::vector<int> failure_nodes;
};

namespace detail {

template <typename Fn>
inline void for_each_parallel(const std::vector<int>& items, int jobs, Fn fn) {
    if (jobs <= 1 || items.size() <= 1) {
        for (int v : items) fn(v);
        return;
    }
    const int nthreads = std::min<int>(jobs, static_cast<int>(items.size()));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (int w = 0; w < nthreads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (size_t i = w; i < items.size(); i += nthreads) fn(items[i]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Backward induction over the dual solvency cones:
/// W = K* at the leaves; Y(n) = hull of the children's W; W(n) = K*(n) ∩ Y(n)
/// when their relative interiors meet, the empty value otherwise.
inline ConeTrace run_recursion(const MarketModel& model, int jobs = 1) {
    const ScenarioTree& tree = model.tree;
    ConeTrace tr;
    tr.W.assign(tree.size(), PolyhedralCone::empty_value(model.assets));
    tr.Y.assign(tree.size(), PolyhedralCone::empty_value(model.assets));
    for (int leaf : tree.leaves()) tr.W[leaf] = model.solvency_dual[leaf];
    for (int t = tree.horizon() - 1; t >= 0; --t) {
        auto level = tree.nodes_at(t);
        detail::for_each_parallel(level, jobs, [&](int v) {
            tr.Y[v] = conditional_support(tr.W, tree, v);
            if (tr.Y[v].is_empty()) return;  // W stays empty (absorbing)
            if (ri_intersects(model.solvency_dual[v], tr.Y[v]).intersects)
                tr.W[v] = intersect(model.solvency_dual[v], tr.Y[v]);
        });
    }
    tr.holds = true;
    for (int v = 0; v < tree.size(); ++v) {
        if (!tr.W[v].is_empty()) continue;
        tr.holds = false;
        if (tree.node(v).t > tr.failure_time) {
            tr.failure_time = tree.node(v).t;
            tr.failure_nodes.clear();
        }
        if (tree.node(v).t == tr.failure_time) tr.failure_nodes.push_back(v);
    }
    return tr;
}

/// The same induction over the price boxes of a bank-account model:
/// V = C at the leaves; X(n) = hull of the children's V; V(n) = cl(ri C ∩ ri X).
inline BankTrace run_recursion_bank(const MarketModel& model, int jobs = 1) {
    if (model.kind != MarketKind::BankAccount)
        throw std::domain_error("run_recursion_bank: not a bank-account model");
    const ScenarioTree& tree = model.tree;
    BankTrace tr;
    tr.V.assign(tree.size(), Polytope::empty_value(model.assets - 1));
    tr.X.assign(tree.size(), Polytope::empty_value(model.assets - 1));
    for (int leaf : tree.leaves()) tr.V[leaf] = model.boxes[leaf];
    for (int t = tree.horizon() - 1; t >= 0; --t) {
        auto level = tree.nodes_at(t);
        detail::for_each_parallel(level, jobs, [&](int v) {
            tr.X[v] = conditional_support(tr.V, tree, v);
            if (tr.X[v].is_empty()) return;
            tr.V[v] = ri_intersect_closure(model.boxes[v], tr.X[v]);
        });
    }
    tr.holds = true;
    for (int v = 0; v < tree.size(); ++v) {
        if (!tr.V[v].is_empty()) continue;
        tr.holds = false;
        if (tree.node(v).t > tr.failure_time) {
            tr.failure_time = tree.node(v).t;
            tr.failure_nodes.clear();
        }
        if (tree.node(v).t == tr.failure_time) tr.failure_nodes.push_back(v);
    }
    return tr;
}

/// Strictly consistent price process: an exact martingale with Z(n) in the
/// relative interior of K*(n) at every node, normalized to sum 1 at the root.
struct ConsistentPriceProcess {
    std::vector<RatVector> z;  // per node
};

/// One LP: martingale structure (internal-node values substituted by their
/// conditional expectations of the leaf values), root normalization, and a
/// shared slack s maximized over all non-implicit halfspace constraints.
/// A process exists iff the optimum is strictly positive.
inline std::optional<ConsistentPriceProcess> find_consistent_price_process(const MarketModel& model) {
    const ScenarioTree& tree = model.tree;
    const int d = model.assets;
    const auto leaves = tree.leaves();
    const int nl = static_cast<int>(leaves.size());
    std::vector<int> leaf_pos(tree.size(), -1);
    for (int i = 0; i < nl; ++i) leaf_pos[leaves[i]] = i;

    // coefficient of each leaf variable in Z(node) = E[Z_T | F_t](node)
    std::vector<RatVector> coeff(tree.size(), RatVector(nl, Rational(0)));
    for (int t = tree.horizon(); t >= 0; --t)
        for (int v : tree.nodes_at(t)) {
            if (tree.is_leaf(v)) {
                coeff[v][leaf_pos[v]] = 1;
                continue;
            }
            for (int c : tree.children(v)) {
                Rational p = tree.conditional_prob(c);
                for (int l = 0; l < nl; ++l)
                    if (coeff[c][l] != 0) coeff[v][l] += p * coeff[c][l];
            }
        }

    const int nvars = nl * d + 1;  // leaf values then the slack
    const int svar = nl * d;
    LPBuilder lp(nvars);
    lp.set_free(svar);
    lp.set_objective(svar, 1);
    auto z_row = [&](int node, const RatVector& h) {
        RatVector row(nvars, Rational(0));
        for (int l = 0; l < nl; ++l) {
            if (coeff[node][l] == 0) continue;
            for (int i = 0; i < d; ++i)
                if (h[i] != 0) row[l * d + i] += coeff[node][l] * h[i];
        }
        return row;
    };
    for (int v = 0; v < tree.size(); ++v) {
        const PolyhedralCone& kstar = model.solvency_dual[v];
        auto mask = kstar.implicit_halfspaces();
        for (size_t hi = 0; hi < kstar.halfspaces().size(); ++hi) {
            RatVector row = z_row(v, kstar.halfspaces()[hi]);
            if (mask[hi]) {
                lp.add_row(row, Sense::EQ, 0);
            } else {
                row[svar] = -1;
                lp.add_row(row, Sense::GE, 0);
            }
        }
    }
    RatVector norm = z_row(tree.root(), RatVector(d, Rational(1)));
    lp.add_row(norm, Sense::EQ, 1);

    LPOutcome out = lp.solve();
    if (!lp_is_optimal(out) || lp_optimal(out).value <= 0) return std::nullopt;
    const RatVector& pt = lp_optimal(out).point;

    ConsistentPriceProcess cpp;
    cpp.z.assign(tree.size(), RatVector(d, Rational(0)));
    for (int v = 0; v < tree.size(); ++v)
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < nl; ++l)
                if (coeff[v][l] != 0) cpp.z[v][i] += coeff[v][l] * pt[l * d + i];

    // paranoia: exact martingale identities and strict ri-membership
    for (int v = 0; v < tree.size(); ++v) {
        if (!tree.is_leaf(v)) {
            RatVector e(d, Rational(0));
            for (int c : tree.children(v)) e = add(e, scale(tree.conditional_prob(c), cpp.z[c]));
            if (e != cpp.z[v]) throw std::logic_error("consistent price process: martingale identity failed");
        }
        if (!in_relative_interior(model.solvency_dual[v], cpp.z[v]))
            throw std::logic_error("consistent price process: ri-membership failed");
    }
    return cpp;
}

/// Bank form of a consistent price process: dQ/dP = Z_T^1 / Z_0^1 and
/// S = (Z^2/Z^1, ..., Z^d/Z^1), a Q-martingale through ri C_t.
struct BankPriceForm {
    std::vector<Rational> leaf_measure;  // Q per node; zero off the leaves
    std::vector<RatVector> prices;       // S per node, d-1 entries
};

inline BankPriceForm cpp_to_bank_form(const ConsistentPriceProcess& cpp, const MarketModel& model) {
    const ScenarioTree& tree = model.tree;
    const int d = model.assets;
    BankPriceForm out;
    out.leaf_measure.assign(tree.size(), Rational(0));
    out.prices.assign(tree.size(), RatVector(d - 1, Rational(0)));
    const Rational& z0 = cpp.z[tree.root()][0];
    for (int v = 0; v < tree.size(); ++v) {
        if (cpp.z[v][0] <= 0)
            throw std::domain_error("cpp_to_bank_form: Z^1 must be strictly positive");
        for (int i = 1; i < d; ++i) out.prices[v][i - 1] = cpp.z[v][i] / cpp.z[v][0];
    }
    for (int leaf : tree.leaves())
        out.leaf_measure[leaf] = tree.node(leaf).prob * cpp.z[leaf][0] / z0;
    return out;
}

/// An adapted collection x_t in -K_t with pathwise sum zero that leaves the
/// lineality space somewhere: a witness that condition (d) fails.
struct NullStrategyViolation {
    std::vector<RatVector> x;        // per node
    int violation_time = -1;         // smallest t with a node outside K ∩ (-K)
    std::vector<int> violation_nodes;
};

/// LP search over conic coefficients of the generators of -K_t(n),
/// maximizing the weight carried by generators outside the lineality space;
/// a strictly positive optimum certifies the violation, zero means none.
inline std::optional<NullStrategyViolation> find_null_strategy(const MarketModel& model) {
    const ScenarioTree& tree = model.tree;
    const int d = model.assets;
    struct Var {
        int node;
        int gen;
        bool pointed;
    };
    std::vector<Var> vars;
    for (int v = 0; v < tree.size(); ++v) {
        const auto& gens = model.solvency[v].generators();
        for (size_t g = 0; g < gens.size(); ++g) {
            bool line = model.solvency[v].contains(negate(gens[g]));
            vars.push_back({v, static_cast<int>(g), !line});
        }
    }
    const int n = static_cast<int>(vars.size());
    LPBuilder lp(n);
    for (int j = 0; j < n; ++j)
        if (vars[j].pointed) lp.set_objective(j, 1);
    // pathwise sum of x_t vanishes: sum over the path of the generator
    // combinations is zero in every coordinate
    for (int leaf : tree.leaves()) {
        std::vector<char> on_path(tree.size(), 0);
        for (int v : tree.path_to_root(leaf)) on_path[v] = 1;
        for (int i = 0; i < d; ++i) {
            RatVector row(n, Rational(0));
            for (int j = 0; j < n; ++j)
                if (on_path[vars[j].node])
                    row[j] = model.solvency[vars[j].node].generators()[vars[j].gen][i];
            lp.add_row(row, Sense::EQ, 0);
        }
    }
    lp.add_row(RatVector(n, Rational(1)), Sense::LE, 1);

    LPOutcome out = lp.solve();
    if (!lp_is_optimal(out)) throw std::logic_error("find_null_strategy: LP failed");
    if (lp_optimal(out).value <= 0) return std::nullopt;
    const RatVector& lam = lp_optimal(out).point;

    NullStrategyViolation viol;
    viol.x.assign(tree.size(), RatVector(d, Rational(0)));
    for (int j = 0; j < n; ++j)
        if (lam[j] != 0)
            viol.x[vars[j].node] =
                sub(viol.x[vars[j].node], scale(lam[j], model.solvency[vars[j].node].generators()[vars[j].gen]));
    for (int t = 0; t <= tree.horizon() && viol.violation_time < 0; ++t)
        for (int v : tree.nodes_at(t)) {
            if (lineality(model.solvency[v]).contains(viol.x[v])) continue;
            viol.violation_time = t;
            viol.violation_nodes.push_back(v);
        }
    if (viol.violation_time < 0)
        throw std::logic_error("find_null_strategy: positive optimum without violating node");
    return viol;
}

}  // namespace nar

#pragma once

#include <nar/engine.hpp>

#include <string>
#include <utility>
#include <vector>

namespace nar {

/// Explicit arbitrage strategy for a market violating the robust
/// no-arbitrage condition, together with the tightened process it is
/// built against. theta_{-1} = 0 and theta_t = theta_{t-1} + x_t + eps_t.
struct ArbitrageCertificate {
    int failure_time = -1;            // n
    std::vector<int> failure_nodes;   // A_n
    std::vector<RatVector> increments;  // x_t per node; zero before n
    int adjust_time = -1;             // m
    std::vector<int> adjust_nodes;    // B_m
    std::vector<RatVector> epsilon;   // per node; zero off B_m
    Rational lambda;
    MarketModel tightened;            // the contracted process
    std::vector<RatVector> theta;     // per node
    bool valid_for_original = false;  // x_m + eps_m also lies in -K_m
};

/// Largest n with an empty value, and the nodes carrying it.
inline std::pair<int, std::vector<int>> first_failure(const ConeTrace& trace) {
    if (trace.holds) throw std::domain_error("first_failure: recursion verdict is a pass");
    return {trace.failure_time, trace.failure_nodes};
}

inline std::pair<int, std::vector<int>> first_failure(const BankTrace& trace) {
    if (trace.holds) throw std::domain_error("first_failure: recursion verdict is a pass");
    return {trace.failure_time, trace.failure_nodes};
}

/// x_n per time-n node: on A_n the proper separator of K_n* and Y_n
/// (an element of -K_n ∩ Y_n*), zero elsewhere.
inline std::vector<RatVector> initial_increment(int n, const std::vector<int>& failure_nodes,
                                                const ConeTrace& trace, const MarketModel& model) {
    std::vector<RatVector> x(model.tree.size(), RatVector(model.assets, Rational(0)));
    std::vector<char> failing(model.tree.size(), 0);
    for (int v : failure_nodes) failing[v] = 1;
    for (int v : model.tree.nodes_at(n)) {
        if (!failing[v]) continue;
        if (trace.Y[v].is_empty())
            throw std::logic_error("initial_increment: Y empty at a failure node of maximal time");
        x[v] = proper_separator(model.solvency_dual[v], trace.Y[v]);
        for (const auto& w : model.solvency_dual[v].generators())
            if (dot(w, x[v]) > 0) throw std::logic_error("initial_increment: separator left -K_n");
        for (const auto& y : trace.Y[v].generators())
            if (dot(x[v], y) < 0) throw std::logic_error("initial_increment: separator left Y_n*");
    }
    return x;
}

/// Forward pass: the time-n increment is pushed down the tree, splitting at
/// every node into a -K_t part (the increment taken there) and a remainder
/// carried to the children; pathwise the increments sum to zero exactly.
inline void decompose_forward(std::vector<RatVector>& x, int n, const MarketModel& model,
                              const ConeTrace& trace) {
    const ScenarioTree& tree = model.tree;
    std::vector<RatVector> carry(tree.size(), RatVector(model.assets, Rational(0)));
    for (int v : tree.nodes_at(n))
        for (int c : tree.children(v)) carry[c] = x[v];
    for (int t = n + 1; t <= tree.horizon(); ++t) {
        for (int v : tree.nodes_at(t)) {
            if (tree.is_leaf(v)) {
                if (!model.solvency[v].contains(carry[v]))
                    throw std::logic_error("decompose_forward: carried value left K_T at a leaf");
                x[v] = negate(carry[v]);
                continue;
            }
            auto [g, rest] = decompose_into_sum(carry[v], model.solvency[v], dual(trace.Y[v]));
            x[v] = negate(g);
            for (int c : tree.children(v)) carry[c] = rest;
        }
    }
    // pathwise telescoping
    for (int leaf : tree.leaves()) {
        RatVector s(model.assets, Rational(0));
        for (int v : tree.path_to_root(leaf)) s = add(s, x[v]);
        if (!is_zero(s)) throw std::logic_error("decompose_forward: pathwise sum is not zero");
    }
}

struct EpsilonAdjustment {
    int m = -1;
    std::vector<int> nodes;          // B_m
    std::vector<RatVector> epsilon;  // per node
    MarketModel tightened;
    bool valid_for_original = true;
};

namespace detail {

// Greedy coordinatewise-maximal nonnegative shift keeping x + eps inside the
// cone {y : <w,y> <= 0 for all w in walls}.
inline RatVector recover_slack(const RatVector& x, const std::vector<RatVector>& walls) {
    const int d = static_cast<int>(x.size());
    RatVector eps(d, Rational(0));
    RatVector cur = x;
    for (int i = 0; i < d; ++i) {
        bool bounded = false;
        Rational best;
        for (const auto& w : walls) {
            if (w[i] <= 0) continue;
            Rational room = Rational(-dot(w, cur) / w[i]);
            if (!bounded || room < best) {
                best = room;
                bounded = true;
            }
        }
        if (!bounded || best <= 0) continue;
        eps[i] = best;
        cur[i] += best;
    }
    return eps;
}

}  // namespace detail

/// m is the smallest time where some increment leaves the lineality space of
/// its solvency cone. On each B_m node the discarded value is recovered by a
/// componentwise-maximal nonnegative eps with x_m + eps in -K_m ∩ -K(tight);
/// a node whose increment is tight against -K_m in every coordinate takes
/// eps = 0 (keeping the certificate valid for the original process), and only
/// when every node is tight like that does a second pass fall back to
/// adjusting inside -K(tight) alone.
inline EpsilonAdjustment epsilon_adjust(const std::vector<RatVector>& x, const MarketModel& model,
                                        const Rational& lambda) {
    const ScenarioTree& tree = model.tree;
    EpsilonAdjustment adj{-1, {}, {}, tighten_model(model, lambda), true};
    for (int t = 0; t <= tree.horizon() && adj.m < 0; ++t)
        for (int v : tree.nodes_at(t)) {
            if (lineality(model.solvency[v]).contains(x[v])) continue;
            adj.m = t;
            adj.nodes.push_back(v);
        }
    if (adj.m < 0)
        throw std::domain_error("epsilon_adjust: increments never leave the lineality space");

    adj.epsilon.assign(tree.size(), RatVector(model.assets, Rational(0)));
    bool any_nonzero = false;
    for (int v : adj.nodes) {
        std::vector<RatVector> walls = model.solvency_dual[v].generators();
        const auto& tight_walls = adj.tightened.solvency_dual[v].generators();
        walls.insert(walls.end(), tight_walls.begin(), tight_walls.end());
        adj.epsilon[v] = detail::recover_slack(x[v], walls);
        if (!is_zero(adj.epsilon[v])) any_nonzero = true;
    }
    if (!any_nonzero) {
        adj.valid_for_original = false;
        for (int v : adj.nodes) {
            adj.epsilon[v] = detail::recover_slack(x[v], adj.tightened.solvency_dual[v].generators());
            if (!is_zero(adj.epsilon[v])) any_nonzero = true;
        }
        if (!any_nonzero)
            throw std::logic_error("epsilon_adjust: no nonzero adjustment at any violating node");
    }
    return adj;
}

/// Builds theta and re-verifies every certificate invariant exactly;
/// throws naming the violated invariant otherwise.
inline ArbitrageCertificate assemble_and_verify(const MarketModel& model, int n,
                                                const std::vector<int>& failure_nodes,
                                                const std::vector<RatVector>& x,
                                                const EpsilonAdjustment& adj,
                                                const Rational& lambda) {
    const ScenarioTree& tree = model.tree;
    ArbitrageCertificate cert{n,          failure_nodes, x,    adj.m, adj.nodes,
                              adj.epsilon, lambda,        adj.tightened, {},
                              adj.valid_for_original};
    auto fail = [](const std::string& inv) {
        throw std::logic_error("certificate verification failed: " + inv);
    };

    cert.theta.assign(tree.size(), RatVector(model.assets, Rational(0)));
    for (int t = 0; t <= tree.horizon(); ++t)
        for (int v : tree.nodes_at(t)) {
            RatVector prev = tree.node(v).parent < 0 ? RatVector(model.assets, Rational(0))
                                                     : cert.theta[tree.node(v).parent];
            cert.theta[v] = add(prev, add(x[v], adj.epsilon[v]));
        }

    std::vector<char> in_bm(tree.size(), 0);
    for (int v : adj.nodes) in_bm[v] = 1;
    bool eps_nonzero = false;
    for (int v = 0; v < tree.size(); ++v) {
        const int t = tree.node(v).t;
        if (t < n && !is_zero(x[v])) fail("increments must vanish before the failure time");
        for (const auto& w : model.solvency_dual[v].generators())
            if (dot(w, x[v]) > 0) fail("x_t must lie in -K_t at node '" + tree.node(v).id + "'");
        for (const auto& e : adj.epsilon[v])
            if (e < 0) fail("epsilon must be nonnegative");
        if ((t != adj.m || !in_bm[v]) && !is_zero(adj.epsilon[v]))
            fail("epsilon must vanish off B_m");
        if (in_bm[v] && !is_zero(adj.epsilon[v])) eps_nonzero = true;
        RatVector inc = add(x[v], adj.epsilon[v]);
        for (const auto& w : adj.tightened.solvency_dual[v].generators())
            if (dot(w, inc) > 0)
                fail("theta must be self-financing for the tightened process at node '" +
                     tree.node(v).id + "'");
        if (cert.valid_for_original)
            for (const auto& w : model.solvency_dual[v].generators())
                if (dot(w, inc) > 0) fail("certificate claims validity for the original process");
    }
    if (!eps_nonzero) fail("epsilon must be nonzero somewhere on B_m");

    // tightened process satisfies the spread inclusion
    for (int v = 0; v < tree.size(); ++v) {
        const BidAskMatrix& orig = model.matrices[v];
        const BidAskMatrix& tgt = adj.tightened.matrices[v];
        for (int i = 0; i < model.assets; ++i)
            for (int j = i + 1; j < model.assets; ++j) {
                auto [lo, hi] = orig.interval(i, j);
                auto [tlo, thi] = tgt.interval(i, j);
                if (lo == hi ? (tlo != lo || thi != hi) : (tlo <= lo || thi >= hi))
                    fail("tightened spreads must lie in the relative interior of the originals");
            }
    }

    bool nonzero_leaf = false;
    for (int leaf : tree.leaves()) {
        for (const auto& c : cert.theta[leaf])
            if (c < 0) fail("terminal payoff must be componentwise nonnegative");
        if (!is_zero(cert.theta[leaf])) nonzero_leaf = true;
    }
    if (!nonzero_leaf) fail("terminal payoff must be nonzero on some leaf");
    return cert;
}

/// End-to-end construction from a failing recursion trace.
inline ArbitrageCertificate build_arbitrage(const MarketModel& model, const ConeTrace& trace,
                                            const Rational& lambda) {
    auto [n, nodes] = first_failure(trace);
    std::vector<RatVector> x = initial_increment(n, nodes, trace, model);
    decompose_forward(x, n, model, trace);
    EpsilonAdjustment adj = epsilon_adjust(x, model, lambda);
    return assemble_and_verify(model, n, nodes, x, adj, lambda);
}

}  // namespace nar

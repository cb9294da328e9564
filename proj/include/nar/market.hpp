#pragma once

#include <nar/cone.hpp>
#include <nar/polytope.hpp>
#include <nar/tree.hpp>

#include <string>
#include <vector>

namespace nar {

struct BidAskViolation {
    // axiom (i): pi[i][j] <= 0; axiom (ii): pi[i][i] != 1;
    // axiom (iii): pi[i][j] > pi[i][k] * pi[k][j]
    int axiom = 0;
    int i = 0, j = 0, k = 0;

    std::string describe() const {
        switch (axiom) {
            case 1: return "axiom (i): pi[" + std::to_string(i) + "][" + std::to_string(j) + "] must be > 0";
            case 2: return "axiom (ii): pi[" + std::to_string(i) + "][" + std::to_string(i) + "] must be 1";
            default:
                return "axiom (iii): pi[" + std::to_string(i) + "][" + std::to_string(j) +
                       "] exceeds pi[" + std::to_string(i) + "][" + std::to_string(k) + "]*pi[" +
                       std::to_string(k) + "][" + std::to_string(j) + "]";
        }
    }
};

struct MarketError : std::domain_error {
    std::vector<BidAskViolation> violations;
    explicit MarketError(const std::string& what, std::vector<BidAskViolation> v = {})
        : std::domain_error(what), violations(std::move(v)) {}
};

/// Matrix of exchange rates: pi[i][j] units of asset i buy one unit of j.
struct BidAskMatrix {
    int d = 0;
    RatMatrix pi;

    const Rational& at(int i, int j) const { return pi.at(i, j); }

    /// Bid-ask interval of asset j in units of asset i: [1/pi[j][i], pi[i][j]].
    std::pair<Rational, Rational> interval(int i, int j) const {
        return {Rational(1 / pi.at(j, i)), pi.at(i, j)};
    }
    bool degenerate(int i, int j) const {
        auto [lo, hi] = interval(i, j);
        return lo == hi;
    }
};

inline std::vector<BidAskViolation> bid_ask_violations(const RatMatrix& pi) {
    std::vector<BidAskViolation> out;
    const int d = pi.rows;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (pi.at(i, j) <= 0) out.push_back({1, i, j, 0});
    for (int i = 0; i < d; ++i)
        if (pi.at(i, i) != 1) out.push_back({2, i, i, 0});
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                if (pi.at(i, j) > pi.at(i, k) * pi.at(k, j)) out.push_back({3, i, j, k});
    return out;
}

inline BidAskMatrix validate_bid_ask(const RatMatrix& pi) {
    if (pi.rows != pi.cols) throw MarketError("bid-ask matrix must be square");
    if (pi.rows < 2) throw MarketError("bid-ask matrix needs d >= 2");
    auto v = bid_ask_violations(pi);
    if (!v.empty()) {
        std::string what = "invalid bid-ask matrix:";
        for (const auto& x : v) what += "\n  " + x.describe();
        throw MarketError(what, std::move(v));
    }
    return BidAskMatrix{pi.rows, pi};
}

/// Bid and ask prices in units of the bank account (asset 1).
struct BankAccountPrices {
    RatVector bid;
    RatVector ask;
    int d() const { return static_cast<int>(bid.size()); }
};

inline BankAccountPrices validate_bank_prices(const RatVector& bid, const RatVector& ask) {
    if (bid.size() != ask.size()) throw MarketError("bid/ask price vectors differ in length");
    if (bid.size() < 2) throw MarketError("bank-account model needs d >= 2");
    if (bid[0] != 1 || ask[0] != 1) throw MarketError("bank-account asset must have bid = ask = 1");
    for (size_t i = 0; i < bid.size(); ++i) {
        if (bid[i] <= 0) throw MarketError("bid price " + std::to_string(i + 1) + " must be > 0");
        if (bid[i] > ask[i])
            throw MarketError("bid must not exceed ask for asset " + std::to_string(i + 1));
    }
    return BankAccountPrices{bid, ask};
}

inline BidAskMatrix bank_to_matrix(const BankAccountPrices& p) {
    const int d = p.d();
    RatMatrix pi(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) pi.at(i, j) = i == j ? Rational(1) : Rational(p.ask[j] / p.bid[i]);
    return validate_bid_ask(pi);
}

/// K(Pi): conic hull of the basis vectors and the exchange vectors
/// pi[i][j] e_i - e_j.
inline PolyhedralCone solvency_cone(const BidAskMatrix& m) {
    std::vector<RatVector> gens;
    for (int i = 0; i < m.d; ++i) gens.push_back(unit_vector(m.d, i));
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) {
            if (i == j) continue;
            RatVector g(m.d, Rational(0));
            g[i] = m.at(i, j);
            g[j] = -1;
            gens.push_back(std::move(g));
        }
    return PolyhedralCone::from_generators(gens, m.d);
}

/// Same cone from the bank-account generators {e_i - S^b_i e_1},
/// {S^a_j e_1 - e_j}, {e_i}.
inline PolyhedralCone solvency_cone_bank(const BankAccountPrices& p) {
    const int d = p.d();
    std::vector<RatVector> gens;
    for (int i = 0; i < d; ++i) gens.push_back(unit_vector(d, i));
    for (int i = 1; i < d; ++i) {
        RatVector g(d, Rational(0));
        g[i] = 1;
        g[0] = -p.bid[i];
        gens.push_back(std::move(g));
        RatVector h(d, Rational(0));
        h[0] = p.ask[i];
        h[i] = -1;
        gens.push_back(std::move(h));
    }
    return PolyhedralCone::from_generators(gens, d);
}

/// Cartesian product of the bid-ask intervals of assets 2..d (in R^{d-1}).
inline Polytope price_box(const BankAccountPrices& p) {
    RatVector lo(p.bid.begin() + 1, p.bid.end());
    RatVector hi(p.ask.begin() + 1, p.ask.end());
    return box(lo, hi);
}

namespace detail {

inline std::pair<Rational, Rational> contract_interval(const Rational& lo, const Rational& hi,
                                                       const Rational& lambda) {
    if (lo == hi) return {lo, hi};  // zero spread is "smaller than itself"
    Rational mid = (lo + hi) / 2;
    Rational half = (hi - lo) / 2;
    return {Rational(mid - lambda * half), Rational(mid + lambda * half)};
}

}  // namespace detail

/// Contracts every nondegenerate bid-ask interval about its midpoint by a
/// factor lambda in (0,1), halving lambda when axiom (iii) breaks. Midpoint
/// contraction can be incompatible with (iii) for every lambda (cross rates
/// and their through-the-chain products contract differently), so after a few
/// retries the spreads are contracted toward a strictly consistent price
/// vector w in ri K*(Pi) instead and closed under shortest exchange products;
/// cycle products then telescope through the w-ratios to at least 1, which
/// keeps the closure a valid bid-ask matrix with strictly smaller spreads.
inline BidAskMatrix tighten(const BidAskMatrix& m, Rational lambda) {
    if (lambda <= 0 || lambda >= 1) throw std::domain_error("tighten: lambda must lie in (0,1)");
    Rational shrinking = lambda;
    for (int attempt = 0; attempt < 6; ++attempt) {
        RatMatrix pi = m.pi;
        for (int i = 0; i < m.d; ++i)
            for (int j = i + 1; j < m.d; ++j) {
                auto [lo, hi] = m.interval(i, j);
                auto [nlo, nhi] = detail::contract_interval(lo, hi, shrinking);
                pi.at(i, j) = nhi;
                pi.at(j, i) = Rational(1 / nlo);
            }
        if (bid_ask_violations(pi).empty()) return BidAskMatrix{m.d, pi};
        shrinking /= 2;
    }

    RiIntersection ri = ri_intersects(dual(solvency_cone(m)), dual(solvency_cone(m)));
    if (!ri.witness) throw MarketError("tighten: no interior price vector found");
    const RatVector& w = *ri.witness;
    RatMatrix pi(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) {
            if (i == j) {
                pi.at(i, j) = 1;
                continue;
            }
            Rational anchor = w[j] / w[i];
            pi.at(i, j) = anchor + lambda * (m.at(i, j) - anchor);
        }
    for (int k = 0; k < m.d; ++k)
        for (int i = 0; i < m.d; ++i)
            for (int j = 0; j < m.d; ++j) {
                if (i == j || i == k || j == k) continue;
                Rational via = pi.at(i, k) * pi.at(k, j);
                if (via < pi.at(i, j)) pi.at(i, j) = via;
            }
    auto bad = bid_ask_violations(pi);
    if (!bad.empty()) throw MarketError("tighten: contraction toward the interior failed", bad);
    return BidAskMatrix{m.d, pi};
}

/// Bank-account tightening contracts the price intervals directly; the
/// derived matrix satisfies (iii) by construction.
inline BankAccountPrices tighten_bank(const BankAccountPrices& p, const Rational& lambda) {
    if (lambda <= 0 || lambda >= 1) throw std::domain_error("tighten: lambda must lie in (0,1)");
    BankAccountPrices out = p;
    for (int i = 1; i < p.d(); ++i) {
        auto [lo, hi] = detail::contract_interval(p.bid[i], p.ask[i], lambda);
        out.bid[i] = lo;
        out.ask[i] = hi;
    }
    return out;
}

enum class MarketKind { General, BankAccount };

/// Adapted bid-ask process on a scenario tree, with the per-node solvency
/// cones precomputed. Immutable after construction.
struct MarketModel {
    MarketKind kind = MarketKind::General;
    ScenarioTree tree;
    int assets = 0;
    std::vector<BidAskMatrix> matrices;       // per node
    std::vector<BankAccountPrices> prices;    // per node, bank kind only
    std::vector<PolyhedralCone> solvency;     // K_t
    std::vector<PolyhedralCone> solvency_dual;  // K_t*
    std::vector<Polytope> boxes;              // C_t, bank kind only
};

inline MarketModel make_general_model(ScenarioTree tree, std::vector<RatMatrix> pis) {
    if (static_cast<int>(pis.size()) != tree.size())
        throw MarketError("model needs one bid-ask matrix per node");
    MarketModel m{MarketKind::General, std::move(tree), 0, {}, {}, {}, {}, {}};
    for (auto& pi : pis) {
        m.matrices.push_back(validate_bid_ask(pi));
        if (m.assets == 0) m.assets = m.matrices.back().d;
        if (m.matrices.back().d != m.assets) throw MarketError("asset count must be uniform");
    }
    for (const auto& bam : m.matrices) {
        m.solvency.push_back(solvency_cone(bam));
        m.solvency_dual.push_back(dual(m.solvency.back()));
    }
    return m;
}

inline MarketModel make_bank_model(ScenarioTree tree,
                                   std::vector<std::pair<RatVector, RatVector>> bid_ask) {
    if (static_cast<int>(bid_ask.size()) != tree.size())
        throw MarketError("model needs one price pair per node");
    MarketModel m{MarketKind::BankAccount, std::move(tree), 0, {}, {}, {}, {}, {}};
    for (auto& [bid, ask] : bid_ask) {
        m.prices.push_back(validate_bank_prices(bid, ask));
        if (m.assets == 0) m.assets = m.prices.back().d();
        if (m.prices.back().d() != m.assets) throw MarketError("asset count must be uniform");
    }
    for (const auto& p : m.prices) {
        m.matrices.push_back(bank_to_matrix(p));
        m.solvency.push_back(solvency_cone(m.matrices.back()));
        m.solvency_dual.push_back(dual(m.solvency.back()));
        m.boxes.push_back(price_box(p));
    }
    return m;
}

/// The tightened process: every node's spreads contracted by lambda.
inline MarketModel tighten_model(const MarketModel& m, const Rational& lambda) {
    if (m.kind == MarketKind::BankAccount) {
        std::vector<std::pair<RatVector, RatVector>> ba;
        for (const auto& p : m.prices) {
            BankAccountPrices t = tighten_bank(p, lambda);
            ba.emplace_back(t.bid, t.ask);
        }
        return make_bank_model(m.tree, std::move(ba));
    }
    std::vector<RatMatrix> pis;
    for (const auto& bam : m.matrices) pis.push_back(tighten(bam, lambda).pi);
    return make_general_model(m.tree, std::move(pis));
}

}  // namespace nar

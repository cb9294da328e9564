#pragma once

// Shared test fixtures: the two-leaf bank model behind the acceptance data
// file, and a seeded random model generator (NARCTL_SEED overrides the seed).

#include <nar/market.hpp>

#include <cstdlib>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

using namespace nar;

/// Bank model with C0=[2,6]^2, C1=[4,8]^2 and point boxes (9,6), (4,1):
/// fails robust no-arbitrage at t=0 and admits a three-step arbitrage.
inline MarketModel three_step_model() {
    std::vector<ScenarioTree::Node> nodes;
    nodes.push_back({"root", 0, -1, rat(1), {}});
    nodes.push_back({"mid", 1, 0, rat(1), {}});
    nodes.push_back({"up", 2, 1, rat(1, 2), {}});
    nodes.push_back({"down", 2, 1, rat(1, 2), {}});
    ScenarioTree tree(std::move(nodes), 2);
    std::vector<std::pair<RatVector, RatVector>> ba = {
        {{rat(1), rat(2), rat(2)}, {rat(1), rat(6), rat(6)}},
        {{rat(1), rat(4), rat(4)}, {rat(1), rat(8), rat(8)}},
        {{rat(1), rat(9), rat(6)}, {rat(1), rat(9), rat(6)}},
        {{rat(1), rat(4), rat(1)}, {rat(1), rat(4), rat(1)}},
    };
    return make_bank_model(std::move(tree), std::move(ba));
}

inline unsigned long default_seed() {
    if (const char* env = std::getenv("NARCTL_SEED")) return std::strtoul(env, nullptr, 10);
    return 987654321UL;
}

class Rng {
  public:
    explicit Rng(unsigned long seed = default_seed()) : gen_(seed) {}

    long pick(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }

    Rational rational(long num_lo, long num_hi, long den_hi = 6) {
        return rat(pick(num_lo, num_hi), pick(1, den_hi));
    }

    Rational positive_rational(long num_hi = 9, long den_hi = 4) {
        return rat(pick(1, num_hi), pick(1, den_hi));
    }

    RatVector vector(int dim, long lo = -5, long hi = 5) {
        RatVector v(dim);
        for (auto& x : v) x = rational(lo, hi, 3);
        return v;
    }

    std::vector<RatVector> vectors(int count, int dim, long lo = -5, long hi = 5) {
        std::vector<RatVector> out;
        for (int i = 0; i < count; ++i) out.push_back(vector(dim, lo, hi));
        return out;
    }

    ScenarioTree tree(int horizon, int max_branch = 3) {
        std::vector<ScenarioTree::Node> nodes;
        nodes.push_back({"n0", 0, -1, rat(1), {}});
        std::vector<int> level{0};
        int next_id = 1;
        for (int t = 1; t <= horizon; ++t) {
            std::vector<int> nl;
            for (int p : level) {
                const int b = static_cast<int>(pick(1, max_branch));
                // split the parent's probability into b positive rational parts
                std::vector<Rational> weights(b);
                Rational total = 0;
                for (auto& w : weights) {
                    w = rat(pick(1, 5));
                    total += w;
                }
                for (int c = 0; c < b; ++c) {
                    ScenarioTree::Node n;
                    n.id = "n" + std::to_string(next_id);
                    n.t = t;
                    n.parent = p;
                    n.prob = Rational(nodes[p].prob * weights[c] / total);
                    nodes.push_back(std::move(n));
                    nl.push_back(next_id++);
                }
            }
            level = std::move(nl);
        }
        return ScenarioTree(std::move(nodes), horizon);
    }

    /// Valid bank prices: asset 1 pinned to 1, others positive with a random
    /// (possibly zero) spread.
    std::pair<RatVector, RatVector> bank_prices(int d) {
        RatVector bid(d), ask(d);
        bid[0] = ask[0] = 1;
        for (int i = 1; i < d; ++i) {
            Rational mid = positive_rational(12, 4) + rat(1, 4);
            Rational half = pick(0, 3) == 0 ? Rational(0) : positive_rational(3, 4) / 4;
            bid[i] = mid - half > 0 ? Rational(mid - half) : Rational(mid / 2);
            ask[i] = mid + half;
            if (bid[i] > ask[i]) std::swap(bid[i], ask[i]);
        }
        return {bid, ask};
    }

    MarketModel bank_model(int d, int horizon, int max_branch = 3) {
        ScenarioTree t = tree(horizon, max_branch);
        std::vector<std::pair<RatVector, RatVector>> ba;
        for (int v = 0; v < t.size(); ++v) ba.push_back(bank_prices(d));
        return make_bank_model(std::move(t), std::move(ba));
    }

    /// Prices follow a random walk down the tree with spreads wide enough to
    /// overlap between periods; these markets frequently satisfy robust
    /// no-arbitrage, balancing the corpus.
    MarketModel walk_bank_model(int d, int horizon, int max_branch = 3) {
        ScenarioTree t = tree(horizon, max_branch);
        std::vector<RatVector> mid(t.size(), RatVector(d, rat(1)));
        for (int i = 1; i < d; ++i) mid[t.root()][i] = positive_rational(8, 2) + rat(2);
        for (int v = 0; v < t.size(); ++v) {
            if (v != t.root())
                for (int i = 1; i < d; ++i)
                    mid[v][i] = mid[t.node(v).parent][i] * rat(pick(3, 5), 4);
        }
        std::vector<std::pair<RatVector, RatVector>> ba;
        for (int v = 0; v < t.size(); ++v) {
            RatVector bid(d, rat(1)), ask(d, rat(1));
            for (int i = 1; i < d; ++i) {
                Rational half = pick(0, 5) == 0 ? Rational(0) : Rational(mid[v][i] * rat(pick(1, 3), 6));
                bid[i] = mid[v][i] - half;
                ask[i] = mid[v][i] + half;
            }
            ba.emplace_back(std::move(bid), std::move(ask));
        }
        return make_bank_model(std::move(t), std::move(ba));
    }

    /// Valid general bid-ask matrix: a bank-derived matrix with random extra
    /// friction, rejection-sampled against axiom (iii).
    RatMatrix bid_ask_matrix(int d) {
        for (int attempt = 0; attempt < 40; ++attempt) {
            auto [bid, ask] = bank_prices(d);
            RatMatrix pi(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    pi.at(i, j) = i == j ? Rational(1) : Rational(ask[j] / bid[i]);
            if (attempt + 1 < 40) {
                // inflate a few entries to break the bank structure
                for (int k = 0, n = static_cast<int>(pick(0, d)); k < n; ++k) {
                    int i = static_cast<int>(pick(0, d - 1));
                    int j = static_cast<int>(pick(0, d - 1));
                    if (i != j) pi.at(i, j) *= rat(pick(5, 8), 4);
                }
            }
            if (bid_ask_violations(pi).empty()) return pi;
        }
        throw std::logic_error("bid_ask_matrix: sampling failed");
    }

    MarketModel general_model(int d, int horizon, int max_branch = 3) {
        ScenarioTree t = tree(horizon, max_branch);
        std::vector<RatMatrix> pis;
        for (int v = 0; v < t.size(); ++v) pis.push_back(bid_ask_matrix(d));
        return make_general_model(std::move(t), std::move(pis));
    }

    /// Random cone from a handful of integer generators (may be degenerate,
    /// lower-dimensional, or contain lines).
    PolyhedralCone cone(int dim, int max_gens = 5) {
        std::vector<RatVector> gens;
        const int n = static_cast<int>(pick(1, max_gens));
        for (int i = 0; i < n; ++i) {
            RatVector g(dim);
            for (auto& x : g) x = rat(pick(-4, 4));
            gens.push_back(std::move(g));
        }
        return PolyhedralCone::from_generators(gens, dim);
    }

    Polytope polytope(int dim, int max_pts = 6, long lo = 1, long hi = 9) {
        std::vector<RatVector> pts;
        const int n = static_cast<int>(pick(1, max_pts));
        for (int i = 0; i < n; ++i) {
            RatVector p(dim);
            for (auto& x : p) x = rational(lo, hi, 2);
            pts.push_back(std::move(p));
        }
        return Polytope::from_points(std::move(pts), dim);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace fixtures

#pragma once

#include <nar/rational.hpp>
#include <nar/simplex.hpp>

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace nar {

namespace detail {

/// Minimal generators of {x : <v,x> >= 0 for all v in normals}:
/// extreme rays of the pointed part (living in the orthogonal complement of
/// the lineality space) plus a basis of the lineality space.
struct DualGenerators {
    std::vector<RatVector> rays;
    std::vector<RatVector> lineality;
};

inline DualGenerators dual_generators(const std::vector<RatVector>& normals_in, int dim) {
    std::vector<RatVector> normals;
    for (const auto& h : normals_in) {
        if (static_cast<int>(h.size()) != dim)
            throw std::invalid_argument("dual_generators: dimension mismatch");
        if (!is_zero(h)) normals.push_back(h);
    }

    DualGenerators out;
    out.lineality = nullspace_basis(RatMatrix::from_rows(normals, dim));
    const int m = dim - static_cast<int>(out.lineality.size());
    if (m == 0) return out;

    // Coordinates on the orthogonal complement of the lineality space.
    std::vector<RatVector> q = nullspace_basis(RatMatrix::from_rows(out.lineality, dim));
    std::vector<RatVector> rows;  // constraints expressed in those coordinates
    rows.reserve(normals.size());
    for (const auto& h : normals) {
        RatVector r(m);
        for (int j = 0; j < m; ++j) r[j] = dot(h, q[j]);
        rows.push_back(std::move(r));
    }

    // Initial simplicial cone from m independent rows; remaining rows are cut
    // in incrementally (standard double description, pointed case).
    std::vector<int> base;
    {
        RatMatrix sel(0, m);
        for (size_t i = 0; i < rows.size() && static_cast<int>(base.size()) < m; ++i) {
            RatMatrix cand(sel.rows + 1, m);
            cand.a = sel.a;
            cand.a.insert(cand.a.end(), rows[i].begin(), rows[i].end());
            if (rank(cand) > sel.rows) {
                sel = std::move(cand);
                base.push_back(static_cast<int>(i));
            }
        }
        if (static_cast<int>(base.size()) != m)
            throw std::logic_error("dual_generators: rank defect after projection");
    }
    RatMatrix basemat(m, m);
    for (int i = 0; i < m; ++i) basemat.set_row(i, rows[base[i]]);
    RatMatrix inv = *try_invert(basemat);

    std::vector<int> order = base;
    for (size_t i = 0; i < rows.size(); ++i)
        if (std::find(base.begin(), base.end(), static_cast<int>(i)) == base.end())
            order.push_back(static_cast<int>(i));

    std::vector<RatVector> rays;
    std::vector<std::vector<char>> zsets;  // per ray: tight flags over processed rows
    for (int j = 0; j < m; ++j) {
        RatVector col(m);
        for (int i = 0; i < m; ++i) col[i] = inv.at(i, j);
        rays.push_back(primitive(col));
    }

    size_t processed = 0;
    auto tight_flags = [&](const RatVector& r) {
        std::vector<char> z(processed);
        for (size_t i = 0; i < processed; ++i) z[i] = dot(rows[order[i]], r) == 0 ? 1 : 0;
        return z;
    };
    for (auto& r : rays) {
        processed = m;
        zsets.push_back(tight_flags(r));
    }
    processed = m;

    for (size_t oi = m; oi < order.size(); ++oi) {
        const RatVector& h = rows[order[oi]];
        std::vector<Rational> val(rays.size());
        std::vector<int> pos, zer, neg;
        for (size_t r = 0; r < rays.size(); ++r) {
            val[r] = dot(h, rays[r]);
            if (val[r] > 0) pos.push_back(static_cast<int>(r));
            else if (val[r] < 0) neg.push_back(static_cast<int>(r));
            else zer.push_back(static_cast<int>(r));
        }
        if (neg.empty()) {
            for (size_t r = 0; r < rays.size(); ++r) zsets[r].push_back(val[r] == 0 ? 1 : 0);
            ++processed;
            continue;
        }
        std::vector<RatVector> next;
        std::vector<std::vector<char>> nextz;
        for (int r : pos) {
            next.push_back(rays[r]);
            auto z = zsets[r];
            z.push_back(0);
            nextz.push_back(std::move(z));
        }
        for (int r : zer) {
            next.push_back(rays[r]);
            auto z = zsets[r];
            z.push_back(1);
            nextz.push_back(std::move(z));
        }
        for (int p : pos) {
            for (int n : neg) {
                // adjacency: no third extreme ray is tight wherever both are
                bool adjacent = true;
                for (size_t r = 0; r < rays.size() && adjacent; ++r) {
                    if (static_cast<int>(r) == p || static_cast<int>(r) == n) continue;
                    bool superset = true;
                    for (size_t i = 0; i < processed && superset; ++i)
                        if (zsets[p][i] && zsets[n][i] && !zsets[r][i]) superset = false;
                    if (superset) adjacent = false;
                }
                if (!adjacent) continue;
                RatVector w = primitive(sub(scale(val[p], rays[n]), scale(val[n], rays[p])));
                ++processed;  // include the new row when computing tight flags
                auto z = tight_flags(w);
                --processed;
                next.push_back(std::move(w));
                nextz.push_back(std::move(z));
            }
        }
        rays = std::move(next);
        zsets = std::move(nextz);
        ++processed;
        if (rays.empty()) break;
    }

    for (const auto& r : rays) {
        RatVector x(dim, Rational(0));
        for (int j = 0; j < m; ++j)
            if (r[j] != 0) x = add(x, scale(r[j], q[j]));
        out.rays.push_back(primitive(x));
    }
    std::sort(out.rays.begin(), out.rays.end(), lex_less);
    std::sort(out.lineality.begin(), out.lineality.end(), lex_less);
    return out;
}

inline std::vector<RatVector> flatten(const DualGenerators& dg) {
    std::vector<RatVector> gens = dg.rays;
    for (const auto& b : dg.lineality) {
        gens.push_back(b);
        gens.push_back(negate(b));
    }
    std::sort(gens.begin(), gens.end(), lex_less);
    return gens;
}

}  // namespace detail

/// Closed convex polyhedral cone with cross-validated V- and H-representations.
/// The empty set-valued value is a distinct flag, never conflated with {0}.
class PolyhedralCone {
  public:
    static PolyhedralCone empty_value(int dim) {
        PolyhedralCone c;
        c.dim_ = dim;
        c.empty_ = true;
        return c;
    }

    static PolyhedralCone from_generators(const std::vector<RatVector>& gens, int dim) {
        PolyhedralCone c;
        c.dim_ = dim;
        c.empty_ = false;
        c.halfspaces_ = detail::flatten(detail::dual_generators(gens, dim));
        c.generators_ = detail::flatten(detail::dual_generators(c.halfspaces_, dim));
        return c;
    }

    static PolyhedralCone from_halfspaces(const std::vector<RatVector>& hs, int dim) {
        PolyhedralCone c;
        c.dim_ = dim;
        c.empty_ = false;
        c.generators_ = detail::flatten(detail::dual_generators(hs, dim));
        c.halfspaces_ = detail::flatten(detail::dual_generators(c.generators_, dim));
        return c;
    }

    static PolyhedralCone zero(int dim) { return from_generators({}, dim); }
    static PolyhedralCone full(int dim) { return from_halfspaces({}, dim); }

    int dim() const { return dim_; }
    bool is_empty() const { return empty_; }
    bool is_zero() const { return !empty_ && generators_.empty(); }
    const std::vector<RatVector>& generators() const { return generators_; }
    const std::vector<RatVector>& halfspaces() const { return halfspaces_; }

    bool contains(const RatVector& x) const {
        if (empty_) return false;
        for (const auto& h : halfspaces_)
            if (dot(h, x) < 0) return false;
        return true;
    }

    /// Flags halfspaces that are tight on the whole cone (implicit equalities).
    std::vector<char> implicit_halfspaces() const {
        std::vector<char> mask(halfspaces_.size(), 1);
        for (size_t i = 0; i < halfspaces_.size(); ++i)
            for (const auto& g : generators_)
                if (dot(halfspaces_[i], g) != 0) { mask[i] = 0; break; }
        return mask;
    }

    bool is_subspace() const {
        if (empty_) return false;
        auto mask = implicit_halfspaces();
        return std::all_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
    }

  private:
    int dim_ = 0;
    bool empty_ = true;
    std::vector<RatVector> generators_;
    std::vector<RatVector> halfspaces_;
};

inline bool equal(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.dim() != b.dim()) return false;
    if (a.is_empty() || b.is_empty()) return a.is_empty() == b.is_empty();
    for (const auto& g : a.generators())
        if (!b.contains(g)) return false;
    for (const auto& g : b.generators())
        if (!a.contains(g)) return false;
    return true;
}

inline PolyhedralCone dual(const PolyhedralCone& c) {
    if (c.is_empty()) throw std::domain_error("dual: empty-flagged cone");
    return PolyhedralCone::from_generators(c.halfspaces(), c.dim());
}

inline PolyhedralCone intersect(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("intersect: dimension mismatch");
    if (a.is_empty() || b.is_empty()) return PolyhedralCone::empty_value(a.dim());
    std::vector<RatVector> hs = a.halfspaces();
    hs.insert(hs.end(), b.halfspaces().begin(), b.halfspaces().end());
    return PolyhedralCone::from_halfspaces(hs, a.dim());
}

inline PolyhedralCone minkowski_sum(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("minkowski_sum: dimension mismatch");
    if (a.is_empty() || b.is_empty()) return PolyhedralCone::empty_value(a.dim());
    std::vector<RatVector> gs = a.generators();
    gs.insert(gs.end(), b.generators().begin(), b.generators().end());
    return PolyhedralCone::from_generators(gs, a.dim());
}

/// Smallest closed convex cone containing the union; empty members dropped.
inline PolyhedralCone conic_hull_of_union(const std::vector<PolyhedralCone>& cones) {
    if (cones.empty()) throw std::invalid_argument("conic_hull_of_union: no cones");
    const int d = cones.front().dim();
    std::vector<RatVector> gs;
    bool any = false;
    for (const auto& c : cones) {
        if (c.dim() != d) throw std::invalid_argument("conic_hull_of_union: dimension mismatch");
        if (c.is_empty()) continue;
        any = true;
        gs.insert(gs.end(), c.generators().begin(), c.generators().end());
    }
    if (!any) return PolyhedralCone::empty_value(d);
    return PolyhedralCone::from_generators(gs, d);
}

/// C ∩ (−C) as a cone.
inline PolyhedralCone lineality(const PolyhedralCone& c) {
    if (c.is_empty()) throw std::domain_error("lineality: empty-flagged cone");
    auto basis = nullspace_basis(RatMatrix::from_rows(c.halfspaces(), c.dim()));
    std::vector<RatVector> gens;
    for (const auto& b : basis) {
        gens.push_back(b);
        gens.push_back(negate(b));
    }
    return PolyhedralCone::from_generators(gens, c.dim());
}

inline bool in_relative_interior(const PolyhedralCone& c, const RatVector& x) {
    if (c.is_empty()) return false;
    auto mask = c.implicit_halfspaces();
    const auto& hs = c.halfspaces();
    for (size_t i = 0; i < hs.size(); ++i) {
        Rational v = dot(hs[i], x);
        if (mask[i] ? v != 0 : v <= 0) return false;
    }
    return true;
}

struct RiIntersection {
    bool intersects = false;
    std::optional<RatVector> witness;  // lies in both relative interiors
};

/// Decides ri A ∩ ri B ≠ ∅ by maximizing a shared slack over the non-implicit
/// halfspaces of both cones, restricted to their affine hulls, over the
/// cross-section sum(|x_i|) = 1. Strict feasibility <=> optimum > 0.
inline RiIntersection ri_intersects(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.is_empty() || b.is_empty())
        throw std::domain_error("ri_intersects: empty-flagged cone");
    if (a.dim() != b.dim()) throw std::invalid_argument("ri_intersects: dimension mismatch");
    const int d = a.dim();

    std::vector<RatVector> eq, strict;
    for (const auto* c : {&a, &b}) {
        auto mask = c->implicit_halfspaces();
        for (size_t i = 0; i < c->halfspaces().size(); ++i)
            (mask[i] ? eq : strict).push_back(c->halfspaces()[i]);
    }
    if (strict.empty()) {
        // both cones are subspaces; 0 lies in both relative interiors
        return {true, RatVector(d, Rational(0))};
    }

    // vars: x (free, d), u (nonneg, d), s (free)
    LPBuilder lp(2 * d + 1);
    for (int i = 0; i < d; ++i) lp.set_free(i);
    lp.set_free(2 * d);
    lp.set_objective(2 * d, 1);
    for (const auto& h : eq) {
        RatVector row(2 * d + 1, Rational(0));
        for (int i = 0; i < d; ++i) row[i] = h[i];
        lp.add_row(row, Sense::EQ, 0);
    }
    for (const auto& h : strict) {
        RatVector row(2 * d + 1, Rational(0));
        for (int i = 0; i < d; ++i) row[i] = h[i];
        row[2 * d] = -1;
        lp.add_row(row, Sense::GE, 0);
    }
    for (int i = 0; i < d; ++i) {
        RatVector r1(2 * d + 1, Rational(0)), r2(2 * d + 1, Rational(0));
        r1[d + i] = 1;
        r1[i] = -1;
        lp.add_row(r1, Sense::GE, 0);  // u_i >= x_i
        r2[d + i] = 1;
        r2[i] = 1;
        lp.add_row(r2, Sense::GE, 0);  // u_i >= -x_i
    }
    RatVector ones(2 * d + 1, Rational(0));
    for (int i = 0; i < d; ++i) ones[d + i] = 1;
    lp.add_row(ones, Sense::EQ, 1);

    LPOutcome out = lp.solve();
    if (!lp_is_optimal(out)) throw std::logic_error("ri_intersects: slack LP failed");
    const LPOptimal& opt = lp_optimal(out);
    if (opt.value <= 0) return {false, std::nullopt};
    RatVector witness(opt.point.begin(), opt.point.begin() + d);
    return {true, primitive(witness)};
}

/// A vector v with <v,a> <= 0 <= <v,b> on A and B, nonzero somewhere on them.
/// Chosen deterministically: the relative-interior point (primitive ray sum)
/// of the first face of the separator cone (B − A)* exposed by a generator of
/// B, falling back to the ray sum of the whole separator cone.
inline RatVector proper_separator(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.is_empty() || b.is_empty())
        throw std::domain_error("proper_separator: empty-flagged cone");
    if (ri_intersects(a, b).intersects)
        throw std::domain_error("proper_separator: relative interiors intersect");
    std::vector<RatVector> normals;
    for (const auto& g : a.generators()) normals.push_back(negate(g));
    for (const auto& g : b.generators()) normals.push_back(g);
    detail::DualGenerators sep = detail::dual_generators(normals, a.dim());
    if (sep.rays.empty())
        throw std::logic_error("proper_separator: separator cone has no extreme ray");
    for (const auto& h : b.generators()) {
        RatVector sum(a.dim(), Rational(0));
        bool hit = false;
        for (const auto& r : sep.rays)
            if (dot(r, h) == 0) {
                sum = add(sum, r);
                hit = true;
            }
        if (hit) return primitive(sum);
    }
    RatVector sum(a.dim(), Rational(0));
    for (const auto& r : sep.rays) sum = add(sum, r);
    return primitive(sum);
}

/// Splits y = a + b with a in A, b in B, exact; lexicographically smallest
/// conic coefficients over the generators of A then B.
inline std::pair<RatVector, RatVector> decompose_into_sum(const RatVector& y,
                                                          const PolyhedralCone& a,
                                                          const PolyhedralCone& b) {
    if (a.is_empty() || b.is_empty())
        throw std::domain_error("decompose_into_sum: empty-flagged cone");
    const int d = a.dim();
    if (b.dim() != d || static_cast<int>(y.size()) != d)
        throw std::invalid_argument("decompose_into_sum: dimension mismatch");
    const auto& ga = a.generators();
    const auto& gb = b.generators();
    const int n = static_cast<int>(ga.size() + gb.size());
    RatMatrix A(d, n);
    for (int i = 0; i < d; ++i) {
        for (size_t j = 0; j < ga.size(); ++j) A.at(i, static_cast<int>(j)) = ga[j][i];
        for (size_t j = 0; j < gb.size(); ++j)
            A.at(i, static_cast<int>(ga.size() + j)) = gb[j][i];
    }
    auto coeff = lexmin_nonneg_solution(A, y);
    if (!coeff) throw std::domain_error("decompose_into_sum: y not in A + B");
    RatVector pa(d, Rational(0));
    for (size_t j = 0; j < ga.size(); ++j)
        if ((*coeff)[j] != 0) pa = add(pa, scale((*coeff)[j], ga[j]));
    return {pa, sub(y, pa)};
}

}  // namespace nar

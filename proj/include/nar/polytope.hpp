#pragma once

#include <nar/cone.hpp>

#include <algorithm>
#include <vector>

namespace nar {

/// Bounded convex polytope in V-representation; vertices are exactly the
/// extreme points. Empty value is a distinct flag.
class Polytope {
  public:
    static Polytope empty_value(int dim) {
        Polytope p;
        p.dim_ = dim;
        p.empty_ = true;
        return p;
    }

    static Polytope from_points(std::vector<RatVector> pts, int dim) {
        for (const auto& v : pts)
            if (static_cast<int>(v.size()) != dim)
                throw std::invalid_argument("Polytope: dimension mismatch");
        Polytope p;
        p.dim_ = dim;
        p.empty_ = pts.empty();
        std::sort(pts.begin(), pts.end(), lex_less);
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        // prune non-extreme points: v is redundant iff it is a convex
        // combination of the others
        for (size_t i = 0; i < pts.size();) {
            if (pts.size() == 1) break;
            std::vector<RatVector> others;
            for (size_t j = 0; j < pts.size(); ++j)
                if (j != i) others.push_back(pts[j]);
            if (in_convex_hull(pts[i], others))
                pts.erase(pts.begin() + static_cast<long>(i));
            else
                ++i;
        }
        p.vertices_ = std::move(pts);
        return p;
    }

    int dim() const { return dim_; }
    bool is_empty() const { return empty_; }
    const std::vector<RatVector>& vertices() const { return vertices_; }

    bool contains(const RatVector& x) const {
        if (empty_) return false;
        return in_convex_hull(x, vertices_);
    }

    static bool in_convex_hull(const RatVector& x, const std::vector<RatVector>& pts) {
        if (pts.empty()) return false;
        const int d = static_cast<int>(x.size());
        const int n = static_cast<int>(pts.size());
        RatMatrix A(d + 1, n);
        RatVector b(d + 1);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < n; ++j) A.at(i, j) = pts[j][i];
            b[i] = x[i];
        }
        for (int j = 0; j < n; ++j) A.at(d, j) = 1;
        b[d] = 1;
        return lexmin_nonneg_solution(A, b).has_value();
    }

  private:
    int dim_ = 0;
    bool empty_ = true;
    std::vector<RatVector> vertices_;
};

inline bool equal(const Polytope& a, const Polytope& b) {
    if (a.dim() != b.dim()) return false;
    if (a.is_empty() || b.is_empty()) return a.is_empty() == b.is_empty();
    return a.vertices() == b.vertices();
}

/// Product of intervals [lo_i, hi_i]; degenerate intervals collapse.
inline Polytope box(const RatVector& lo, const RatVector& hi) {
    const int d = static_cast<int>(lo.size());
    if (static_cast<int>(hi.size()) != d) throw std::invalid_argument("box: dimension mismatch");
    for (int i = 0; i < d; ++i) {
        if (lo[i] <= 0) throw std::domain_error("box: bounds must be positive");
        if (lo[i] > hi[i]) throw std::domain_error("box: lo > hi in coordinate " + std::to_string(i));
    }
    std::vector<RatVector> corners{RatVector{}};
    for (int i = 0; i < d; ++i) {
        std::vector<RatVector> next;
        for (const auto& c : corners) {
            RatVector a = c;
            a.push_back(lo[i]);
            next.push_back(a);
            if (hi[i] != lo[i]) {
                RatVector b = c;
                b.push_back(hi[i]);
                next.push_back(b);
            }
        }
        corners = std::move(next);
    }
    return Polytope::from_points(std::move(corners), d);
}

inline Polytope hull_of_union(const std::vector<Polytope>& polys) {
    if (polys.empty()) throw std::invalid_argument("hull_of_union: no polytopes");
    const int d = polys.front().dim();
    std::vector<RatVector> pts;
    bool any = false;
    for (const auto& p : polys) {
        if (p.dim() != d) throw std::invalid_argument("hull_of_union: dimension mismatch");
        if (p.is_empty()) continue;
        any = true;
        pts.insert(pts.end(), p.vertices().begin(), p.vertices().end());
    }
    if (!any) return Polytope::empty_value(d);
    return Polytope::from_points(std::move(pts), d);
}

/// Cone of rays {λ(1,x) : λ ≥ 0, x ∈ A} in dimension dim+1.
inline PolyhedralCone hormander_lift(const Polytope& a) {
    if (a.is_empty()) return PolyhedralCone::empty_value(a.dim() + 1);
    std::vector<RatVector> gens;
    for (const auto& v : a.vertices()) {
        RatVector g(a.dim() + 1);
        g[0] = 1;
        for (int i = 0; i < a.dim(); ++i) g[i + 1] = v[i];
        gens.push_back(std::move(g));
    }
    return PolyhedralCone::from_generators(gens, a.dim() + 1);
}

/// Inverse of the lift on cones all of whose generators have positive first
/// coordinate (lifts of bounded sets).
inline Polytope hormander_project(const PolyhedralCone& c) {
    if (c.is_empty()) return Polytope::empty_value(c.dim() - 1);
    std::vector<RatVector> pts;
    for (const auto& g : c.generators()) {
        if (g[0] <= 0)
            throw std::domain_error("hormander_project: cone is not the lift of a bounded set");
        RatVector v(g.begin() + 1, g.end());
        pts.push_back(scale(Rational(1) / g[0], v));
    }
    if (pts.empty()) {
        // the zero cone projects to nothing
        return Polytope::empty_value(c.dim() - 1);
    }
    return Polytope::from_points(std::move(pts), c.dim() - 1);
}

/// cl(ri A ∩ ri B): empty-flagged when the relative interiors are disjoint,
/// A ∩ B otherwise. Decided and computed through the cone lifts.
inline Polytope ri_intersect_closure(const Polytope& a, const Polytope& b) {
    if (a.is_empty() || b.is_empty())
        throw std::domain_error("ri_intersect_closure: empty-flagged polytope");
    if (a.dim() != b.dim())
        throw std::invalid_argument("ri_intersect_closure: dimension mismatch");
    PolyhedralCone la = hormander_lift(a);
    PolyhedralCone lb = hormander_lift(b);
    if (!ri_intersects(la, lb).intersects) return Polytope::empty_value(a.dim());
    return hormander_project(intersect(la, lb));
}

inline bool in_relative_interior(const Polytope& p, const RatVector& x) {
    if (p.is_empty()) return false;
    RatVector lifted(p.dim() + 1);
    lifted[0] = 1;
    for (int i = 0; i < p.dim(); ++i) lifted[i + 1] = x[i];
    return in_relative_interior(hormander_lift(p), lifted);
}

}  // namespace nar

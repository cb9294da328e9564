#pragma once

#include <nar/cone.hpp>
#include <nar/polytope.hpp>

#include <string>
#include <vector>

namespace nar {

/// Finite filtered probability space as a rooted tree. Nodes at time t are
/// the atoms of F_t; probabilities are unconditional and telescope exactly.
class ScenarioTree {
  public:
    struct Node {
        std::string id;
        int t = 0;
        int parent = -1;  // -1 for the root
        Rational prob;
        std::vector<int> children;
    };

    ScenarioTree(std::vector<Node> nodes, int horizon) : nodes_(std::move(nodes)), horizon_(horizon) {
        for (size_t i = 0; i < nodes_.size(); ++i) {
            Node& n = nodes_[i];
            if (n.parent >= 0) nodes_[n.parent].children.push_back(static_cast<int>(i));
        }
        validate();
    }

    int horizon() const { return horizon_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int i) const { return nodes_.at(i); }
    int root() const { return root_; }
    bool is_leaf(int i) const { return node(i).children.empty(); }

    const std::vector<int>& children(int i) const { return node(i).children; }

    std::vector<int> nodes_at(int t) const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (nodes_[i].t == t) out.push_back(i);
        return out;
    }

    std::vector<int> leaves() const { return nodes_at(horizon_); }

    /// Path from n up to the root, inclusive; length t+1.
    std::vector<int> path_to_root(int n) const {
        std::vector<int> out;
        for (int cur = n; cur >= 0; cur = node(cur).parent) out.push_back(cur);
        return out;
    }

    int find(const std::string& id) const {
        for (int i = 0; i < size(); ++i)
            if (nodes_[i].id == id) return i;
        throw std::invalid_argument("unknown node id '" + id + "'");
    }

    Rational conditional_prob(int child) const {
        const Node& c = node(child);
        if (c.parent < 0) return 1;
        return Rational(c.prob / node(c.parent).prob);
    }

  private:
    void validate() {
        int roots = 0;
        for (int i = 0; i < size(); ++i) {
            const Node& n = nodes_[i];
            if (n.prob <= 0) throw std::domain_error("node '" + n.id + "': probability must be > 0");
            if (n.parent < 0) {
                ++roots;
                root_ = i;
                if (n.t != 0) throw std::domain_error("root '" + n.id + "' must have t = 0");
                if (n.prob != 1) throw std::domain_error("root probability must be 1");
            } else {
                if (n.parent >= size()) throw std::domain_error("node '" + n.id + "': bad parent");
                if (node(n.parent).t != n.t - 1)
                    throw std::domain_error("node '" + n.id + "': parent must be one period earlier");
            }
            if (n.children.empty() && n.t != horizon_)
                throw std::domain_error("node '" + n.id + "': every leaf must be at the horizon");
            if (!n.children.empty()) {
                Rational s = 0;
                for (int c : n.children) s += node(c).prob;
                if (s != n.prob)
                    throw std::domain_error("node '" + n.id + "': children probabilities must sum to the node's");
            }
        }
        if (roots != 1) throw std::domain_error("tree must have exactly one root at t = 0");
    }

    std::vector<Node> nodes_;
    int horizon_ = 0;
    int root_ = 0;
};

/// One value per node; ambient dimension uniform.
using AdaptedConeProcess = std::vector<PolyhedralCone>;
using AdaptedPolytopeProcess = std::vector<Polytope>;

/// Support of the regular conditional upper distribution at a node, already
/// convexified: the conic hull of the children's values. Empty-flagged as
/// soon as any child is empty.
inline PolyhedralCone conditional_support(const AdaptedConeProcess& f, const ScenarioTree& tree,
                                          int n) {
    const auto& kids = tree.children(n);
    if (kids.empty()) throw std::domain_error("conditional_support: leaf node");
    std::vector<PolyhedralCone> vals;
    for (int c : kids) {
        if (f.at(c).is_empty()) return PolyhedralCone::empty_value(f.at(c).dim());
        vals.push_back(f.at(c));
    }
    return conic_hull_of_union(vals);
}

/// Polytope counterpart: convex hull of the children's values.
inline Polytope conditional_support(const AdaptedPolytopeProcess& f, const ScenarioTree& tree,
                                    int n) {
    const auto& kids = tree.children(n);
    if (kids.empty()) throw std::domain_error("conditional_support: leaf node");
    std::vector<Polytope> vals;
    for (int c : kids) {
        if (f.at(c).is_empty()) return Polytope::empty_value(f.at(c).dim());
        vals.push_back(f.at(c));
    }
    return hull_of_union(vals);
}

}  // namespace nar

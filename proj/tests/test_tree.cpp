#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nar/tree.hpp>

#include "support/fixtures.hpp"

using namespace nar;

namespace {

ScenarioTree two_leaf_tree() {
    std::vector<ScenarioTree::Node> nodes;
    nodes.push_back({"root", 0, -1, rat(1), {}});
    nodes.push_back({"mid", 1, 0, rat(1), {}});
    nodes.push_back({"w1", 2, 1, rat(1, 3), {}});
    nodes.push_back({"w2", 2, 1, rat(2, 3), {}});
    return ScenarioTree(std::move(nodes), 2);
}

}  // namespace

TEST_CASE("navigation on the two-leaf tree") {
    ScenarioTree t = two_leaf_tree();
    CHECK(t.nodes_at(2) == std::vector<int>{2, 3});
    CHECK(t.children(1) == std::vector<int>{2, 3});
    CHECK(t.path_to_root(2).size() == 3);  // depth t+1
    CHECK(t.find("w2") == 3);
    CHECK_THROWS_AS(t.find("nope"), std::invalid_argument);
    CHECK(t.conditional_prob(2) == rat(1, 3));
    CHECK(t.conditional_prob(0) == rat(1));
}

TEST_CASE("single-node tree has no children at the root") {
    std::vector<ScenarioTree::Node> nodes{{"r", 0, -1, rat(1), {}}};
    ScenarioTree t(std::move(nodes), 0);
    CHECK(t.children(t.root()).empty());
    CHECK(t.leaves() == std::vector<int>{0});
}

TEST_CASE("tree invariants are enforced") {
    // leaf probabilities summing to 3/4 break the telescoping invariant
    std::vector<ScenarioTree::Node> bad;
    bad.push_back({"r", 0, -1, rat(1), {}});
    bad.push_back({"a", 1, 0, rat(1, 2), {}});
    bad.push_back({"b", 1, 0, rat(1, 4), {}});
    CHECK_THROWS_AS(ScenarioTree(std::move(bad), 1), std::domain_error);

    std::vector<ScenarioTree::Node> neg;
    neg.push_back({"r", 0, -1, rat(1), {}});
    neg.push_back({"a", 1, 0, rat(3, 2), {}});
    neg.push_back({"b", 1, 0, rat(-1, 2), {}});
    CHECK_THROWS_AS(ScenarioTree(std::move(neg), 1), std::domain_error);

    std::vector<ScenarioTree::Node> early_leaf;
    early_leaf.push_back({"r", 0, -1, rat(1), {}});
    early_leaf.push_back({"a", 1, 0, rat(1, 2), {}});
    early_leaf.push_back({"b", 1, 0, rat(1, 2), {}});
    early_leaf.push_back({"c", 2, 1, rat(1, 2), {}});
    CHECK_THROWS_AS(ScenarioTree(std::move(early_leaf), 2), std::domain_error);
}

TEST_CASE("probabilities telescope: leaves sum to one at every random tree") {
    fixtures::Rng rng;
    for (int i = 0; i < 20; ++i) {
        ScenarioTree t = rng.tree(1 + i % 3);
        Rational total = 0;
        for (int leaf : t.leaves()) total += t.node(leaf).prob;
        CHECK(total == 1);
        for (int v = 0; v < t.size(); ++v) {
            if (t.is_leaf(v)) continue;
            Rational s = 0;
            for (int c : t.children(v)) {
                Rational p = t.conditional_prob(c);
                CHECK(p > 0);
                s += p;
            }
            CHECK(s == 1);
        }
    }
}

TEST_CASE("conditional support: hull of the children, absorbing empty") {
    ScenarioTree t = two_leaf_tree();
    AdaptedConeProcess f(t.size(), PolyhedralCone::empty_value(3));
    f[2] = PolyhedralCone::from_generators({{rat(1), rat(9), rat(6)}}, 3);
    f[3] = PolyhedralCone::from_generators({{rat(1), rat(4), rat(1)}}, 3);
    auto y = conditional_support(f, t, 1);
    CHECK(y.generators().size() == 2);
    CHECK(y.contains({rat(1), rat(9), rat(6)}));
    CHECK(y.contains({rat(1), rat(4), rat(1)}));

    // single child: the value passes through unchanged
    AdaptedConeProcess g(t.size(), PolyhedralCone::empty_value(3));
    g[1] = y;
    CHECK(equal(conditional_support(g, t, 0), y));

    // one empty child absorbs everything
    f[3] = PolyhedralCone::empty_value(3);
    CHECK(conditional_support(f, t, 1).is_empty());

    CHECK_THROWS_AS(conditional_support(f, t, 2), std::domain_error);  // leaf
}

TEST_CASE("conditional support is monotone and fixes constants") {
    fixtures::Rng rng;
    ScenarioTree t = two_leaf_tree();
    for (int i = 0; i < 15; ++i) {
        auto small = rng.cone(3);
        auto extra = rng.cone(3);
        AdaptedConeProcess f(t.size(), PolyhedralCone::empty_value(3));
        f[2] = small;
        f[3] = extra;
        auto before = conditional_support(f, t, 1);
        f[2] = conic_hull_of_union({small, extra});  // enlarge one child
        auto after = conditional_support(f, t, 1);
        for (const auto& g : before.generators()) CHECK(after.contains(g));

        AdaptedConeProcess c(t.size(), small);
        CHECK(equal(conditional_support(c, t, 1), small));
    }
}

TEST_CASE("polytope conditional support mirrors the cone one") {
    ScenarioTree t = two_leaf_tree();
    AdaptedPolytopeProcess f(t.size(), Polytope::empty_value(2));
    f[2] = Polytope::from_points({{rat(9), rat(6)}}, 2);
    f[3] = Polytope::from_points({{rat(4), rat(1)}}, 2);
    auto x = conditional_support(f, t, 1);
    CHECK(x.vertices() == std::vector<RatVector>{{rat(4), rat(1)}, {rat(9), rat(6)}});
    f[2] = Polytope::empty_value(2);
    CHECK(conditional_support(f, t, 1).is_empty());
}

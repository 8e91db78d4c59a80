#include <random>

#include "doctest.h"
#include "mtmd/distance.hpp"
#include "mtmd/persistence.hpp"
#include "test_support.hpp"

using namespace mtmd;
using namespace mtmd::testing;

namespace {

MergeTree edge(double lo, double hi)
{
    return MergeTree::from_parts({make_node(0, lo, NodeKind::root), make_node(1, hi, NodeKind::maximum)}, {{0, 1}});
}

int random_size(std::mt19937_64& rng, int max_n)
{
    return 2 * (1 + static_cast<int>(rng() % static_cast<unsigned>(max_n / 2)));
}

// Caterpillar of 16 nodes. Saddle k (value k) carries leaf m_k; saddle 1 pairs
// with the deepest leaf (90). The two least persistent pairs are 7.0 and 7.68.
MergeTree caterpillar16()
{
    const double leaf[] = {100, 9.0, 10.68, 24, 26, 28, 30};
    std::vector<TreeNode> nodes{make_node(0, 0, NodeKind::root)};
    std::vector<std::pair<int, int>> edges;
    int prev = 0;
    for (int k = 1; k <= 7; ++k) {
        nodes.push_back(make_node(k, k, NodeKind::saddle));
        nodes.push_back(make_node(10 + k, leaf[k - 1], NodeKind::maximum));
        edges.emplace_back(prev, k);
        edges.emplace_back(k, 10 + k);
        prev = k;
    }
    nodes.push_back(make_node(18, 90, NodeKind::maximum));
    edges.emplace_back(7, 18);
    return MergeTree::from_parts(nodes, edges);
}

} // namespace

TEST_CASE("trivial distances")
{
    CHECK(merge_tree_matching_distance(edge(0, 4), edge(0, 6)) == 2.0);
    CHECK(brute_force_distance(edge(0, 4), edge(0, 6)) == 2.0);
    const auto base = unstable_baseline();
    CHECK(merge_tree_matching_distance(base, base) == 0.0);
    CHECK(brute_force_distance(base, base) == 0.0);

    const auto r = merge_tree_matching_distance_detailed(base, unstable_flipped());
    CHECK(r.distance == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(r.bdt_pairs == 16);
    CHECK(r.left_bdt >= 0);
    CHECK(r.right_bdt >= 0);
}

TEST_CASE("brute force guard")
{
    std::mt19937_64 rng(7);
    const auto big = random_tree(rng, 12);
    CHECK_THROWS_AS(brute_force_distance(big, big), std::invalid_argument);
    CHECK_NOTHROW(brute_force_distance(random_tree(rng, 10), edge(0, 1)));
}

TEST_CASE("A* distance equals brute force and dominates the bottleneck distance")
{
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 120; ++it) {
        const double gap = it % 3 == 0 ? 0.1 : 1.0;
        const auto f = random_tree(rng, random_size(rng, 8), gap * 0.2, gap * 2.0);
        const auto g = random_tree(rng, random_size(rng, 8), gap * 0.2, gap * 2.0);
        const double d = merge_tree_matching_distance(f, g);
        const double bf = brute_force_distance(f, g);
        CHECK(d == doctest::Approx(bf).epsilon(1e-12));
        const double bn = bottleneck_distance(elder_rule_diagram(f), elder_rule_diagram(g));
        CHECK(d >= bn);
        CHECK(bf >= bn);
        CHECK(merge_tree_matching_distance(g, f) == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("parallel, unshared and unpruned runs agree")
{
    std::mt19937_64 rng(99);
    for (int it = 0; it < 25; ++it) {
        const auto f = random_tree(rng, random_size(rng, 12));
        const auto g = random_tree(rng, random_size(rng, 12));
        const auto ref = merge_tree_matching_distance_detailed(f, g);
        DistanceOptions par;
        par.jobs = 4;
        const auto p = merge_tree_matching_distance_detailed(f, g, par);
        CHECK(p.distance == ref.distance);
        CHECK(p.left_bdt == ref.left_bdt);
        CHECK(p.right_bdt == ref.right_bdt);
        DistanceOptions unshared;
        unshared.share_cutoff = false;
        CHECK(merge_tree_matching_distance(f, g, unshared) == ref.distance);
    }
    for (int it = 0; it < 25; ++it) {
        const auto f = random_tree(rng, random_size(rng, 8));
        const auto g = random_tree(rng, random_size(rng, 8));
        DistanceOptions bare;
        bare.prune = false;
        CHECK(merge_tree_matching_distance(f, g, bare) == merge_tree_matching_distance(f, g));
    }
}

TEST_CASE("isomorphic copies are at distance zero, perturbed copies are not")
{
    std::mt19937_64 rng(5);
    for (int it = 0; it < 30; ++it) {
        const auto t = random_tree(rng, random_size(rng, 10));
        const auto s = shuffled_copy(rng, t);
        CHECK(is_isomorphic(t, s));
        CHECK(merge_tree_matching_distance(t, s) == 0.0);
        const auto p = with_value(t, static_cast<int>(rng() % static_cast<unsigned>(t.size())), 1e-3);
        CHECK_FALSE(is_isomorphic(t, p));
        CHECK(merge_tree_matching_distance(t, p) > 0.0);
    }
}

TEST_CASE("join trees are compared through their negation")
{
    std::mt19937_64 rng(8);
    for (int it = 0; it < 10; ++it) {
        const auto f = random_tree(rng, random_size(rng, 8));
        const auto g = random_tree(rng, random_size(rng, 8));
        CHECK(merge_tree_matching_distance(f.negated(), g.negated()) == merge_tree_matching_distance(f, g));
    }
}

TEST_CASE("simplified report")
{
    std::mt19937_64 rng(3);
    const auto f = random_tree(rng, 8);
    const auto g = random_tree(rng, 6);
    const auto same = simplified_distance_report(f, g, 8);
    CHECK(same.distance == merge_tree_matching_distance(f, g));
    CHECK(same.eps1 == 0.0);
    CHECK(same.eps2 == 0.0);
    CHECK(same.bound == 0.0);
    CHECK(same.nodes1 == 8);
    CHECK(same.nodes2 == 6);

    // One pair removed, threshold halfway between the persistences 7.0 and 7.68.
    const auto big = caterpillar16();
    const auto r = simplified_distance_report(big, big, 14);
    CHECK(r.nodes1 == 14);
    CHECK(r.eps1 == doctest::Approx(7.34).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(3.67).epsilon(1e-12));
    CHECK(r.distance == 0.0);
}

TEST_CASE("simplification sandwich on random pairs")
{
    std::mt19937_64 rng(61);
    int checked = 0;
    for (int it = 0; it < 80; ++it) {
        const auto f = random_tree(rng, random_size(rng, 10));
        const auto g = random_tree(rng, random_size(rng, 10));
        const double a = merge_tree_matching_distance(f, g);
        if (a <= 0.0) {
            continue;
        }
        const double eps = uniform(rng, 0.0, a);
        const double d = merge_tree_matching_distance(simplify_persistence(f, eps), simplify_persistence(g, eps));
        CHECK(d >= a - 1e-9);
        CHECK(d <= a + 0.5 * eps + 1e-9);

        const double e1 = uniform(rng, 0.0, a);
        const double e2 = uniform(rng, 0.0, a);
        const double d12 = merge_tree_matching_distance(simplify_persistence(f, e1), simplify_persistence(g, e2));
        CHECK(std::abs(d12 - a) <= 0.5 * std::max(e1, e2) + 1e-9);
        ++checked;
    }
    CHECK(checked > 60);
}

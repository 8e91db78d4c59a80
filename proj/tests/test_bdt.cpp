#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "mtmd/bdt.hpp"
#include "mtmd/persistence.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mtmd;
using namespace mtmd::testing;

namespace {

// Eight nodes: root - a - {b - {m1, m2}, c - {m3, m4}}.
MergeTree balanced_eight()
{
    std::vector<TreeNode> nodes{make_node(0, 0, NodeKind::root),    make_node(1, 1, NodeKind::saddle),
                                make_node(2, 2, NodeKind::saddle),  make_node(3, 3, NodeKind::saddle),
                                make_node(4, 9, NodeKind::maximum), make_node(5, 6, NodeKind::maximum),
                                make_node(6, 8, NodeKind::maximum), make_node(7, 4, NodeKind::maximum)};
    return MergeTree::from_parts(nodes, {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {2, 5}, {3, 6}, {3, 7}});
}

std::set<std::vector<std::pair<int, int>>> pairings(const std::vector<Bdt>& bdts)
{
    std::set<std::vector<std::pair<int, int>>> out;
    for (const auto& b : bdts) {
        out.insert(b.pairing());
    }
    return out;
}

} // namespace

TEST_CASE("BDT count law on small trees")
{
    const auto edge = MergeTree::from_parts({make_node(0, 0, NodeKind::root), make_node(1, 4, NodeKind::maximum)},
                                            {{0, 1}});
    const auto one = enumerate_bdts(edge);
    REQUIRE(one.size() == 1);
    CHECK(one[0].size() == 1);

    const auto eight = enumerate_bdts(balanced_eight());
    CHECK(eight.size() == 8);
    CHECK(pairings(eight).size() == 8);
    CHECK(pairings(eight) == oracle::decompositions(balanced_eight()));
}

TEST_CASE("baseline tree has four decompositions, all matching the brute-force assignment search")
{
    const auto base = extract_split_tree(triangulate(synth_baseline()));
    const auto all = enumerate_bdts(base);
    CHECK(all.size() == 4);
    CHECK(pairings(all) == oracle::decompositions(base));
    for (const auto& b : all) {
        CHECK(validate_bdt(base, b));
    }
}

TEST_CASE("count law and oracle agreement on random trees up to 12 nodes")
{
    std::mt19937_64 rng(101);
    for (int n = 2; n <= 12; n += 2) {
        for (int it = 0; it < 15; ++it) {
            const auto t = random_tree(rng, n);
            const auto all = enumerate_bdts(t);
            CHECK(all.size() == (std::size_t{1} << (n / 2 - 1)));
            const auto keys = pairings(all);
            CHECK(keys.size() == all.size());
            if (n <= 10) {
                CHECK(keys == oracle::decompositions(t));
            }
            for (const auto& b : all) {
                CHECK(validate_bdt(t, b));
                CHECK(b.size() * 2 == t.size());
                // Every tree node is an endpoint of exactly one branch.
                std::multiset<int> ends;
                for (const auto& br : b.branches()) {
                    ends.insert(br.saddle_id);
                    ends.insert(br.extremum_id);
                }
                for (const auto& node : t.nodes()) {
                    CHECK(ends.count(node.id) == 1);
                }
                for (int i = 1; i < b.size(); ++i) {
                    CHECK(b.parent(i) < i);
                    CHECK(b.branch(i).extremum_value > b.branch(i).saddle_value);
                }
            }
        }
    }
}

TEST_CASE("persistence BDT follows the elder rule")
{
    std::mt19937_64 rng(202);
    for (int it = 0; it < 40; ++it) {
        const auto t = random_tree(rng, 2 * (1 + static_cast<int>(rng() % 6)));
        const auto p = persistence_bdt(t);
        CHECK(validate_bdt(t, p));
        CHECK(pairings(enumerate_bdts(t)).count(p.pairing()) == 1);

        std::vector<std::pair<int, int>> elder;
        for (const auto& q : elder_rule_diagram(t).pairs) {
            elder.emplace_back(q.saddle_id, q.extremum_id);
        }
        std::sort(elder.begin(), elder.end());
        CHECK(p.pairing() == elder);
        CHECK(p.branch(0).saddle_id == t.node(t.root()).id);
        CHECK(p.branch(0).extremum_id == t.node(t.global_max()).id);
        CHECK_FALSE(p.branch(0).elder_pair);
        for (int i = 1; i < p.size(); ++i) {
            CHECK(p.branch(i).elder_pair);
        }
    }
    const auto edge = MergeTree::from_parts({make_node(0, 0, NodeKind::root), make_node(1, 4, NodeKind::maximum)},
                                            {{0, 1}});
    CHECK(persistence_bdt(edge).size() == 1);
}

TEST_CASE("validate_bdt rejects broken decompositions")
{
    const auto t = balanced_eight();
    const auto good = persistence_bdt(t);
    CHECK(validate_bdt(t, good));

    // Branch from saddle 2 to maximum 6, which is not above it: non-monotone path.
    auto bad = good.branches();
    for (auto& b : bad) {
        if (b.saddle_id == 2) {
            b.extremum_id = 6;
            b.extremum_value = 8;
        }
    }
    CHECK_FALSE(validate_bdt(t, Bdt(bad, good.parents())));

    // Two branches ending at the same maximum: an edge is covered twice.
    auto dup = good.branches();
    dup[2].extremum_id = dup[1].extremum_id;
    dup[2].extremum_value = dup[1].extremum_value;
    CHECK_FALSE(validate_bdt(t, Bdt(dup, good.parents())));

    CHECK_THROWS_AS(bdt_from_pairing(t, {{0, 4}, {1, 4}, {2, 5}, {3, 7}}), std::invalid_argument);
}

TEST_CASE("BDT debug dump and canonical form")
{
    const auto t = chain_tree(1.0, 1.05, 10.0, 5.0, 5.2);
    const auto p = persistence_bdt(t);
    CHECK(p.to_string() == "(0:0, 2:10 (1:1, 5:5.2 (3:1.05, 4:5)))");
    std::mt19937_64 rng(1);
    CHECK(canonical_form(p) == canonical_form(persistence_bdt(shuffled_copy(rng, t))));
    CHECK(canonical_form(p) != canonical_form(persistence_bdt(with_value(t, 5, 1e-9))));
}

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mtmd/matching.hpp"
#include "mtmd/zigzag.hpp"
#include "test_support.hpp"

using namespace mtmd;
using namespace mtmd::testing;

namespace {

Branch br(double s, double e, bool elder = true)
{
    return Branch{-1, -1, s, e, elder};
}

double oracle_min(const Bdt& a, const Bdt& b)
{
    double best = std::numeric_limits<double>::infinity();
    for_each_legal_matching(a, b, [&](const Matching& m) { best = std::min(best, matching_cost(m, a, b)); });
    return best;
}

} // namespace

TEST_CASE("relabel_in_range")
{
    CHECK(relabel_in_range(br(0, 4), br(0, 4)));
    CHECK(relabel_in_range(br(0, 4), br(1, 5)));
    CHECK_FALSE(relabel_in_range(br(0, 4), br(3, 10)));
    // v's own range is wider: (3,10) has delta 3.5, and (0,4) falls outside it too.
    CHECK_FALSE(relabel_in_range(br(3, 10), br(0, 4)));
    // Asymmetric: (0.5, 2.5) sits in the range of (0, 4) but not the reverse.
    CHECK(relabel_in_range(br(0, 4), br(0.5, 2.5)));
    CHECK_FALSE(relabel_in_range(br(0.5, 2.5), br(0, 4)));
}

TEST_CASE("heuristic_size_diff")
{
    CHECK(heuristic_size_diff({1, 2}, {3, 4}) == 0.0);
    CHECK(heuristic_size_diff({2, 6, 10}, {}) == 5.0);
    CHECK(heuristic_size_diff({2, 6, 10}, {7, 7}) == 1.0);
    CHECK(heuristic_size_diff({}, {4}) == 2.0);
}

TEST_CASE("ancestor_violation")
{
    // a - b - c chain on both sides plus a sibling d of b.
    const Bdt t({br(0, 10, false), br(1, 9), br(2, 8), br(1.5, 7)}, {-1, 0, 1, 0});
    CHECK_FALSE(ancestor_violation({}, t, t, 1, 2));
    const Matching m{{2, 2, MatchCategory::relabel}};
    // Parent of 2 against a child of 2.
    const Bdt u({br(0, 10, false), br(1, 9), br(2, 8), br(1.5, 7), br(3, 7.5)}, {-1, 0, 1, 0, 2});
    CHECK(ancestor_violation(m, t, u, 1, 4));
    CHECK(ancestor_violation(Matching{{1, 1, MatchCategory::relabel}}, u, u, 4, 0));
    // Siblings.
    CHECK_FALSE(ancestor_violation(Matching{{1, 1, MatchCategory::relabel}}, t, t, 3, 3));
    CHECK_FALSE(ancestor_violation(Matching{{1, kEmpty, MatchCategory::deletion}}, t, t, 2, 2));
}

TEST_CASE("astar basics")
{
    const auto b = persistence_bdt(unstable_baseline());
    const auto same = astar(b, b);
    CHECK(same.complete);
    CHECK(same.cost == 0.0);
    CHECK(is_valid_matching(same.matching, b, b));

    const Bdt one({br(0, 4, false)}, {-1});
    const Bdt other({br(0, 4.5, false)}, {-1});
    const auto r = astar(one, other);
    CHECK(r.complete);
    CHECK(r.cost == 0.5);

    const auto flip = astar(b, persistence_bdt(unstable_flipped()));
    CHECK(flip.complete);
    CHECK(flip.cost == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(flip.stats.expanded > 0);
    CHECK(flip.stats.pushed > 0);
    CHECK(flip.stats.final_evaluations > 0);
    const auto cats = flip.matching;
    CHECK(std::count_if(cats.begin(), cats.end(),
                        [](const MatchPair& p) { return p.category == MatchCategory::movement_relabel; }) == 1);
}

TEST_CASE("astar against the exhaustive minimum on single BDT pairs")
{
    std::mt19937_64 rng(55);
    int feasible = 0;
    int infeasible = 0;
    int ancestor_gaps = 0;
    for (int it = 0; it < 400; ++it) {
        const auto f = random_tree(rng, 2 * (1 + static_cast<int>(rng() % 4)), 0.02, 1.0);
        const auto g = random_tree(rng, 2 * (1 + static_cast<int>(rng() % 4)), 0.02, 1.0);
        const auto bf = enumerate_bdts(f);
        const auto bg = enumerate_bdts(g);
        const auto& a = bf[rng() % bf.size()];
        const auto& b = bg[rng() % bg.size()];

        const double expect = oracle_min(a, b);
        const auto r = astar(a, b);
        AStarOptions no_ancestors;
        no_ancestors.prune_ancestors = false;
        const auto exact = astar(a, b, no_ancestors);
        AStarOptions loose = no_ancestors;
        loose.prune_relabel_range = false;
        const auto bare = astar(a, b, loose);
        if (std::isinf(expect)) {
            // Too many undeletable branches on one side: no legal matching.
            CHECK_FALSE(r.complete);
            CHECK_FALSE(exact.complete);
            ++infeasible;
            continue;
        }
        ++feasible;

        // Relabel-range pruning alone never loses the optimum.
        REQUIRE(exact.complete);
        REQUIRE(bare.complete);
        CHECK(exact.cost == doctest::Approx(expect).epsilon(1e-12));
        CHECK(bare.cost == exact.cost);
        CHECK(is_valid_matching(exact.matching, a, b));
        CHECK(matching_cost(exact.matching, a, b) == exact.cost);

        // Ancestor pruning drops hierarchy-inverting matchings, which are
        // occasionally the cheapest for one particular BDT pair.
        if (r.complete) {
            CHECK(r.cost >= exact.cost - 1e-12);
            CHECK(is_valid_matching(r.matching, a, b));
            if (r.cost > exact.cost + 1e-12) {
                ++ancestor_gaps;
            }
        } else {
            ++ancestor_gaps;
        }

        AStarOptions at = no_ancestors;
        at.cutoff = exact.cost;
        CHECK(astar(a, b, at).complete);
        if (exact.cost > 0) {
            AStarOptions below = no_ancestors;
            below.cutoff = exact.cost * (1 - 1e-9);
            CHECK_FALSE(astar(a, b, below).complete);
        }
    }
    CHECK(feasible > 200);
    CHECK(infeasible > 0);
    MESSAGE("ancestor pruning raised the per-pair optimum on " << ancestor_gaps << " of " << feasible << " pairs");
}

TEST_CASE("astar on persistence BDTs never exceeds the delete-everything matching")
{
    std::mt19937_64 rng(56);
    for (int it = 0; it < 100; ++it) {
        const auto pa = persistence_bdt(random_tree(rng, 2 * (1 + static_cast<int>(rng() % 5))));
        const auto pb = persistence_bdt(random_tree(rng, 2 * (1 + static_cast<int>(rng() % 5))));
        double greedy = std::max(std::abs(pa.branch(0).saddle_value - pb.branch(0).saddle_value),
                                 std::abs(pa.branch(0).extremum_value - pb.branch(0).extremum_value));
        for (int i = 1; i < pa.size(); ++i) {
            greedy = std::max(greedy, 0.5 * pa.branch(i).persistence());
        }
        for (int j = 1; j < pb.size(); ++j) {
            greedy = std::max(greedy, 0.5 * pb.branch(j).persistence());
        }
        const auto r = astar(pa, pb);
        REQUIRE(r.complete);
        CHECK(r.cost <= greedy + 1e-12);
    }
}

TEST_CASE("a shared cutoff below the optimum stops the search")
{
    const auto a = persistence_bdt(unstable_baseline());
    const auto b = persistence_bdt(unstable_flipped());
    std::atomic<double> shared{0.01};
    AStarOptions o;
    o.shared_cutoff = &shared;
    CHECK_FALSE(astar(a, b, o).complete);
    shared = std::numeric_limits<double>::infinity();
    CHECK(astar(a, b, o).complete);
}

TEST_CASE("legal matching enumeration respects deletion rights")
{
    // Root-only trees admit exactly one matching.
    const Bdt r({br(0, 4, false)}, {-1});
    int count = 0;
    for_each_legal_matching(r, r, [&](const Matching&) { ++count; });
    CHECK(count == 1);

    // A non-elder child can never be deleted, so it must pair with the other side's child.
    const Bdt a({br(0, 10, false), br(1, 5, false)}, {-1, 0});
    const Bdt b({br(0, 10, false), br(2, 6, true)}, {-1, 0});
    count = 0;
    for_each_legal_matching(a, b, [&](const Matching& m) {
        ++count;
        CHECK(is_valid_matching(m, a, b));
    });
    CHECK(count == 1);

    const Bdt c({br(0, 10, false), br(1, 5, true)}, {-1, 0});
    count = 0;
    for_each_legal_matching(c, b, [&](const Matching&) { ++count; });
    CHECK(count == 2);
}

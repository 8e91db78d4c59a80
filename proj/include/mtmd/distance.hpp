#pragma once

#include <cstddef>

#include "mtmd/matching.hpp"
#include "mtmd/merge_tree.hpp"

namespace mtmd {

struct DistanceOptions {
    unsigned jobs = 1;
    /// Lower one cutoff across all BDT-pair searches. Off means every pair
    /// is searched to completion.
    bool share_cutoff = true;
    bool prune = true;
};

struct DistanceResult {
    double distance = 0.0;
    int left_bdt = -1;    ///< index into the iteration order (persistence BDT first)
    int right_bdt = -1;
    Matching matching;
    AStarStats stats;
    std::size_t bdt_pairs = 0;
};

/// Minimum matching cost over all BDT pairs. Join trees are compared through
/// their negation.
double merge_tree_matching_distance(const MergeTree& f, const MergeTree& g, const DistanceOptions& options = {});
DistanceResult merge_tree_matching_distance_detailed(const MergeTree& f, const MergeTree& g,
                                                     const DistanceOptions& options = {});

/// Exhaustive minimum over every BDT pair and every legal matching. Both
/// trees must have at most 10 nodes.
double brute_force_distance(const MergeTree& f, const MergeTree& g);

struct SimplifiedReport {
    double distance = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double bound = 0.0;   ///< half the larger threshold
    int nodes1 = 0;
    int nodes2 = 0;
};

/// Simplifies both trees to at most `target_nodes` nodes, then measures them.
SimplifiedReport simplified_distance_report(const MergeTree& f, const MergeTree& g, int target_nodes,
                                            const DistanceOptions& options = {});

} // namespace mtmd

#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "mtmd/bdt.hpp"
#include "mtmd/match_types.hpp"

namespace mtmd {

/// True iff v lies in the relabel range of u: both endpoints of v within
/// half of u's persistence from the matching endpoints of u.
bool relabel_in_range(const Branch& u, const Branch& v);

/// Lower bound on the cost of matching the leftovers: with n = ||U| - |V||,
/// the n-th smallest half persistence on the larger side (0 when n = 0).
double heuristic_size_diff(const std::vector<double>& left_persistence, const std::vector<double>& right_persistence);

/// True iff adding (u, v) next to the already matched (non-empty) pairs puts
/// an ancestor on one side against a descendant on the other.
bool ancestor_violation(const Matching& partial, const Bdt& left, const Bdt& right, int u, int v);

struct AStarOptions {
    double cutoff = std::numeric_limits<double>::infinity();
    /// Optional cutoff lowered by other searches; read at every pop.
    const std::atomic<double>* shared_cutoff = nullptr;
    bool prune_relabel_range = true;
    bool prune_ancestors = true;
};

struct AStarStats {
    std::size_t expanded = 0;
    std::size_t pruned = 0;
    std::size_t pushed = 0;
    std::size_t final_evaluations = 0;

    AStarStats& operator+=(const AStarStats& o)
    {
        expanded += o.expanded;
        pruned += o.pruned;
        pushed += o.pushed;
        final_evaluations += o.final_evaluations;
        return *this;
    }
};

struct AStarResult {
    double cost = 0.0;
    bool complete = false;
    Matching matching;   ///< filled when complete
    AStarStats stats;
};

/// Best-first search for the cheapest matching between two BDTs. Gives up
/// (complete = false) once every open state is above the cutoff.
AStarResult astar(const Bdt& left, const Bdt& right, const AStarOptions& options = {});

/// Calls `visit` for every matching satisfying the four matching conditions.
void for_each_legal_matching(const Bdt& left, const Bdt& right, const std::function<void(const Matching&)>& visit);

} // namespace mtmd

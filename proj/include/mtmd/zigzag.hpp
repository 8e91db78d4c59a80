#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtmd/bdt.hpp"
#include "mtmd/match_types.hpp"

namespace mtmd {

/// Edit operations carrying a source BDT onto a target BDT, in application
/// order: insertions, non-movement relabels, movement relabels, deletions.
struct EditScript {
    std::vector<int> insertions;                  ///< target indices, by increasing target depth
    std::vector<std::pair<int, int>> relabels;    ///< (source, target), parents already matched
    std::vector<std::pair<int, int>> movements;   ///< (source, target), parents not matched
    std::vector<int> deletions;                   ///< source indices

    bool empty() const
    {
        return insertions.empty() && relabels.empty() && movements.empty() && deletions.empty();
    }
};

/// A moving saddle passing another saddle. Node indices are working-tree
/// slots (see ZigzagDiagram).
struct SwapRecord {
    int step = 0;
    int moving = -1;
    int passed = -1;
    double meeting_value = 0.0;
};

/// Mutable BDT used while replaying an edit script. Slots [0, source size)
/// hold source branches; slot source_size + j holds inserted target branch j.
struct WorkingTree {
    std::vector<int> parent;
    std::vector<double> saddle;
    std::vector<double> extremum;
    std::vector<char> present;

    int size() const { return static_cast<int>(parent.size()); }
    int depth(int v) const;
    /// Inclusive: a node is its own ancestor.
    bool is_ancestor(int a, int b) const;

    /// Present nodes as a standalone BDT, root first.
    Bdt to_bdt() const;
};

struct MovementPath {
    std::vector<int> path;   ///< current parent ... target parent
    int intersection = -1;   ///< shallowest node on the path
};

/// Route from `mover`'s current parent to `target_parent` through their lowest
/// common ancestor. Throws if `target_parent` is not present.
MovementPath movement_path(const WorkingTree& tree, int mover, int target_parent);

/// Induced zigzag diagram encoded as per-step vertex values plus swaps.
///
/// Vertex 2*k is slot k's saddle, 2*k+1 its extremum. Contracted (not yet
/// inserted, already deleted) branches sit at their midpoint.
struct ZigzagDiagram {
    std::vector<std::vector<double>> values;   ///< values[step][vertex]
    std::vector<char> active;                  ///< per vertex: takes part in the diagram
    std::vector<SwapRecord> swaps;
    std::vector<std::string> trace;            ///< one "<step> <op> <ids> <values>" line per step
    WorkingTree final_tree;

    int steps() const { return static_cast<int>(values.size()); }
};

EditScript build_edit_script(const Matching& matching, const Bdt& source, const Bdt& target);

/// Applies pending movements shallowest first. A movement whose target parent
/// sits in the mover's own subtree is re-queued behind the others. Appends
/// steps and swaps to `diagram`. `target_slot[j]` is the working slot that
/// carries target node j. Throws std::logic_error if no pending movement can
/// be applied.
void apply_movements_ordered(WorkingTree& tree, const std::vector<std::pair<int, int>>& movements,
                             const std::vector<int>& target_slot, const Bdt& target, ZigzagDiagram& diagram);

/// Replays `matching` from `source` to `target` (matching is source->target).
ZigzagDiagram build_zigzag(const Matching& matching, const Bdt& source, const Bdt& target);

/// Largest spread over all trajectories, including those that switch vertex at a swap.
double trajectory_cost(const ZigzagDiagram& diagram);

/// Minimum of the forward and backward induced diagram costs.
double matching_cost(const Matching& matching, const Bdt& left, const Bdt& right);

} // namespace mtmd

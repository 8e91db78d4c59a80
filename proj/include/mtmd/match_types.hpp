#pragma once

#include <vector>

#include "mtmd/bdt.hpp"

namespace mtmd {

/// Stand-in index for the empty node.
inline constexpr int kEmpty = -1;

enum class MatchCategory { relabel, movement_relabel, insertion, deletion };

/// One pair of a matching between two BDTs; indices refer to BDT nodes.
struct MatchPair {
    int left = kEmpty;
    int right = kEmpty;
    MatchCategory category = MatchCategory::relabel;

    bool operator==(const MatchPair&) const = default;
};

using Matching = std::vector<MatchPair>;

/// Fills in every pair's category. Relabels whose parents are not matched to
/// each other become movement relabels; the root pair never moves.
void classify(Matching& matching, const Bdt& left, const Bdt& right);

/// Checks the four matching conditions: roots paired, every node in exactly
/// one pair, and only elder-rule branches matched to the empty node.
bool is_valid_matching(const Matching& matching, const Bdt& left, const Bdt& right);

/// Swaps the roles of the two sides (categories recomputed by the caller).
Matching reversed(const Matching& matching);

} // namespace mtmd

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtmd/merge_tree.hpp"

namespace mtmd {

/// A monotone merge-tree path from a saddle (or the global minimum, for the
/// root branch) up to a maximum.
struct Branch {
    int saddle_id = -1;
    int extremum_id = -1;
    double saddle_value = 0.0;
    double extremum_value = 0.0;
    /// True iff (saddle, extremum) is a non-global elder-rule pair, i.e. the
    /// branch may be matched to the empty node.
    bool elder_pair = false;

    double persistence() const { return extremum_value - saddle_value; }
    double midpoint() const { return 0.5 * (saddle_value + extremum_value); }

    bool operator==(const Branch&) const = default;
};

/// Branch decomposition tree. Node 0 is the root branch; nodes are stored in
/// ascending saddle order, so every parent precedes its children.
class Bdt {
public:
    Bdt() = default;
    Bdt(std::vector<Branch> branches, std::vector<int> parents);

    int size() const { return static_cast<int>(branches_.size()); }
    const Branch& branch(int i) const { return branches_[static_cast<std::size_t>(i)]; }
    const std::vector<Branch>& branches() const { return branches_; }
    int parent(int i) const { return parents_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& parents() const { return parents_; }
    const std::vector<int>& children(int i) const { return children_[static_cast<std::size_t>(i)]; }
    int depth(int i) const { return depths_[static_cast<std::size_t>(i)]; }

    /// True iff `a` is a proper ancestor of `b`.
    bool is_ancestor(int a, int b) const;

    /// Sorted (saddle id, extremum id) pairs; two BDTs of one tree are equal
    /// iff their pairings are.
    std::vector<std::pair<int, int>> pairing() const;

    /// Debug dump: parenthesised "(saddle_id:val, ext_id:val)" tree.
    std::string to_string() const;

private:
    std::vector<Branch> branches_;
    std::vector<int> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<int> depths_;
};

/// All 2^(n/2-1) hierarchical decompositions in lexicographic order of the
/// (saddle, extremum) id choices. Expects a split-oriented tree.
std::vector<Bdt> enumerate_bdts(const MergeTree& tree);

/// The decomposition whose branches are exactly the elder-rule pairs.
Bdt persistence_bdt(const MergeTree& tree);

/// Builds the BDT induced by assigning each saddle id its extremum id, plus
/// the root's extremum. Throws if the assignment is not a hierarchical
/// decomposition.
Bdt bdt_from_pairing(const MergeTree& tree, const std::vector<std::pair<int, int>>& pairing);

/// True iff `bdt` is a hierarchical decomposition of `tree`.
bool validate_bdt(const MergeTree& tree, const Bdt& bdt);

/// Value-only canonical string (children sorted); equal strings mean the two
/// BDTs are isomorphic as value-labelled rooted trees.
std::string canonical_form(const Bdt& bdt);

} // namespace mtmd

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtmd/scalar_field.hpp"

namespace mtmd {

enum class NodeKind { root, saddle, maximum };

/// Split trees grow upward from the global minimum; join trees downward from
/// the global maximum. All distance machinery works on split orientation.
enum class TreeOrientation { split, join };

struct TreeNode {
    int id = 0;
    double value = 0.0;
    NodeKind kind = NodeKind::maximum;
    int parent = -1;           ///< index into MergeTree::nodes(), -1 for the root
    std::vector<int> children; ///< indices, sorted ascending
};

/// A rooted merge tree over critical vertices.
///
/// Invariants (checked on construction): exactly one root of degree one,
/// every saddle has one parent and two children, leaves are maxima, values
/// strictly increase away from the root (decrease for join trees) in the
/// (value, id) order, and the node count is even.
class MergeTree {
public:
    MergeTree() = default;

    /// Builds and validates a tree from (id, value, kind) records and
    /// (parent-id, child-id) edges. Throws std::invalid_argument.
    static MergeTree from_parts(std::vector<TreeNode> nodes, const std::vector<std::pair<int, int>>& edges,
                                TreeOrientation orientation = TreeOrientation::split);

    /// Orientation is inferred from the root's child: join trees hang down.
    static MergeTree from_parts_infer(std::vector<TreeNode> nodes, const std::vector<std::pair<int, int>>& edges);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& node(int index) const { return nodes_[static_cast<std::size_t>(index)]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int root() const { return root_; }
    TreeOrientation orientation() const { return orientation_; }

    int index_of(int id) const;
    int leaf_count() const;
    int saddle_count() const;

    /// Index of the highest leaf in (value, id) order.
    int global_max() const;

    /// Strict node order used for every tie-break: (value, id), flipped for join trees.
    bool higher(int a, int b) const;

    /// Edges as (parent index, child index).
    std::vector<std::pair<int, int>> edges() const;

    /// True iff `ancestor` lies on the path from `node` to the root (inclusive).
    bool is_ancestor(int ancestor, int node) const;

    /// The same tree with every value negated and the orientation flipped.
    MergeTree negated() const;

    /// Split-oriented view: identity for split trees, negation for join trees.
    MergeTree as_split() const;

private:
    void validate();

    std::vector<TreeNode> nodes_;
    int root_ = -1;
    TreeOrientation orientation_ = TreeOrientation::split;
};

MergeTree extract_split_tree(const SimplicialField& field);
MergeTree extract_join_tree(const SimplicialField& field);

/// Removes every non-global branch whose elder-rule persistence is below
/// `threshold`, lowest persistence first.
MergeTree simplify_persistence(const MergeTree& tree, double threshold);

struct SimplifiedTree {
    MergeTree tree;
    double threshold = 0.0;
};

/// Smallest midpoint threshold that brings the tree to at most `target` nodes.
SimplifiedTree simplify_to_node_count(const MergeTree& tree, int target);

/// Canonical string: children sorted by their own canonical strings, values
/// written exactly (hex float).
std::string canonical_form(const MergeTree& tree);

bool is_isomorphic(const MergeTree& a, const MergeTree& b);

// Tree file format: "n <count>", then "<id> <value> <kind>" per node, then
// "<parent-id> <child-id>" per edge. Kind is root, saddle or max.
MergeTree parse_tree(std::string_view text);
std::string serialize_tree(const MergeTree& tree);
MergeTree read_tree_file(const std::string& path);
void write_tree_file(const std::string& path, const MergeTree& tree);

std::string_view to_string(NodeKind kind);

} // namespace mtmd

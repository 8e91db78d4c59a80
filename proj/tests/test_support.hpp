#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "mtmd/merge_tree.hpp"

namespace mtmd::testing {

using Edges = std::vector<std::pair<int, int>>;

inline TreeNode make_node(int id, double value, NodeKind kind)
{
    TreeNode n;
    n.id = id;
    n.value = value;
    n.kind = kind;
    return n;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random split tree with `n` nodes. Each child sits between `min_gap` and
/// `max_gap` above its parent.
inline MergeTree random_tree(std::mt19937_64& rng, int n, double min_gap = 0.05, double max_gap = 2.0)
{
    const int leaves = n / 2;
    // Grow a full binary tree by splitting random leaves.
    std::vector<int> parent{-1, 0};
    std::vector<int> open{1};
    while (static_cast<int>(open.size()) < leaves) {
        const auto pick = std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng);
        const int v = open[pick];
        const int a = static_cast<int>(parent.size());
        parent.push_back(v);
        parent.push_back(v);
        open[pick] = a;
        open.push_back(a + 1);
    }
    std::vector<double> value(parent.size(), 0.0);
    std::vector<int> kids(parent.size(), 0);
    for (std::size_t v = 1; v < parent.size(); ++v) {
        value[v] = value[static_cast<std::size_t>(parent[v])] + uniform(rng, min_gap, max_gap);
        ++kids[static_cast<std::size_t>(parent[v])];
    }
    std::vector<TreeNode> nodes;
    Edges edges;
    for (std::size_t v = 0; v < parent.size(); ++v) {
        const NodeKind kind = v == 0 ? NodeKind::root : (kids[v] == 0 ? NodeKind::maximum : NodeKind::saddle);
        nodes.push_back(make_node(static_cast<int>(v), value[v], kind));
        if (parent[v] >= 0) {
            edges.emplace_back(parent[v], static_cast<int>(v));
        }
    }
    return MergeTree::from_parts(std::move(nodes), edges);
}

/// Same tree with node order, ids, and edge order permuted.
inline MergeTree shuffled_copy(std::mt19937_64& rng, const MergeTree& t)
{
    std::vector<int> ids(static_cast<std::size_t>(t.size()));
    std::iota(ids.begin(), ids.end(), 100);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<TreeNode> nodes;
    for (int i = 0; i < t.size(); ++i) {
        nodes.push_back(make_node(ids[static_cast<std::size_t>(i)], t.node(i).value, t.node(i).kind));
    }
    std::shuffle(nodes.begin(), nodes.end(), rng);
    Edges edges;
    for (auto [p, c] : t.edges()) {
        edges.emplace_back(ids[static_cast<std::size_t>(p)], ids[static_cast<std::size_t>(c)]);
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    return MergeTree::from_parts(std::move(nodes), edges, t.orientation());
}

/// Copy with node `index` moved by `delta`. Caller keeps monotonicity.
inline MergeTree with_value(const MergeTree& t, int index, double delta)
{
    std::vector<TreeNode> nodes;
    for (int i = 0; i < t.size(); ++i) {
        nodes.push_back(make_node(t.node(i).id, t.node(i).value + (i == index ? delta : 0.0), t.node(i).kind));
    }
    Edges edges;
    for (auto [p, c] : t.edges()) {
        edges.emplace_back(t.node(p).id, t.node(c).id);
    }
    return MergeTree::from_parts(std::move(nodes), edges, t.orientation());
}

/// Three maxima hanging off a chain of two saddles: root(0) - s1 - {m1, s2 - {m2, m3}}.
inline MergeTree chain_tree(double s1, double s2, double m1, double m2, double m3)
{
    std::vector<TreeNode> nodes{make_node(0, 0.0, NodeKind::root), make_node(1, s1, NodeKind::saddle),
                                make_node(2, m1, NodeKind::maximum), make_node(3, s2, NodeKind::saddle),
                                make_node(4, m2, NodeKind::maximum), make_node(5, m3, NodeKind::maximum)};
    return MergeTree::from_parts(std::move(nodes), {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {3, 5}});
}

/// The unstable pair: baseline saddles 1.0 (left) and 1.05 (right) versus a
/// perturbed copy where they read 1.04 and 1.01, so the left pair of peaks
/// now merges first.
inline MergeTree unstable_baseline()
{
    return chain_tree(1.0, 1.05, 10.0, 5.0, 5.2);
}

inline MergeTree unstable_flipped()
{
    // root - 1.01 - {5.2, 1.04 - {10, 5}}
    std::vector<TreeNode> nodes{make_node(0, 0.0, NodeKind::root), make_node(1, 1.01, NodeKind::saddle),
                                make_node(2, 5.2, NodeKind::maximum), make_node(3, 1.04, NodeKind::saddle),
                                make_node(4, 10.0, NodeKind::maximum), make_node(5, 5.0, NodeKind::maximum)};
    return MergeTree::from_parts(std::move(nodes), {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {3, 5}});
}

} // namespace mtmd::testing

#include "mtmd/bdt.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mtmd/persistence.hpp"

namespace mtmd {

namespace {

std::string fmt_value(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<int> tree_depths(const MergeTree& tree)
{
    std::vector<int> depth(static_cast<std::size_t>(tree.size()), 0);
    std::vector<int> stack{tree.root()};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int c : tree.node(v).children) {
            depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(v)] + 1;
            stack.push_back(c);
        }
    }
    return depth;
}

/// Tree indices on the path saddle -> extremum, bottom to top; empty if the
/// extremum is not above the saddle.
std::vector<int> branch_path(const MergeTree& tree, int saddle, int extremum)
{
    std::vector<int> path;
    for (int v = extremum; v != -1; v = tree.node(v).parent) {
        path.push_back(v);
        if (v == saddle) {
            std::reverse(path.begin(), path.end());
            return path;
        }
    }
    return {};
}

std::vector<std::vector<int>> leaves_below(const MergeTree& tree)
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(tree.size()));
    auto rec = [&](auto&& self, int v) -> void {
        auto& mine = out[static_cast<std::size_t>(v)];
        const auto& node = tree.node(v);
        if (node.children.empty()) {
            mine.push_back(v);
            return;
        }
        for (int c : node.children) {
            self(self, c);
            const auto& sub = out[static_cast<std::size_t>(c)];
            mine.insert(mine.end(), sub.begin(), sub.end());
        }
        std::sort(mine.begin(), mine.end(), [&](int a, int b) { return tree.node(a).id < tree.node(b).id; });
    };
    rec(rec, tree.root());
    return out;
}

std::set<std::pair<int, int>> elder_pairs(const MergeTree& tree)
{
    std::set<std::pair<int, int>> out;
    for (const auto& p : elder_rule_diagram(tree).pairs) {
        if (!p.is_global) {
            out.emplace(p.saddle_id, p.extremum_id);
        }
    }
    return out;
}

/// Builds a BDT from (saddle index, extremum index) pairs in tree indices.
/// Reports failure through `error` instead of throwing so validation can reuse it.
Bdt build_bdt(const MergeTree& tree, const std::vector<std::pair<int, int>>& pairs,
              const std::set<std::pair<int, int>>& elders, std::string* error)
{
    auto fail = [&](const std::string& what) {
        if (error != nullptr) {
            *error = what;
        }
        return Bdt{};
    };

    const auto n = static_cast<std::size_t>(tree.size());
    if (pairs.size() * 2 != n) {
        return fail("branch count must be half the node count");
    }
    std::vector<int> owner(n, -1);      // branch that passes through node (interior)
    std::vector<int> edge_cover(n, 0);  // per child node: edge (parent, child)
    int root_branch = -1;
    for (std::size_t b = 0; b < pairs.size(); ++b) {
        const auto [s, e] = pairs[b];
        if (s < 0 || e < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(e) >= n) {
            return fail("branch endpoint out of range");
        }
        if (tree.node(e).kind != NodeKind::maximum) {
            return fail("branch must end at a maximum");
        }
        if (s == tree.root()) {
            if (root_branch != -1) {
                return fail("two branches start at the root");
            }
            root_branch = static_cast<int>(b);
        } else if (tree.node(s).kind != NodeKind::saddle) {
            return fail("non-root branch must start at a saddle");
        }
        const auto path = branch_path(tree, s, e);
        if (path.size() < 2) {
            return fail("branch path is not monotone");
        }
        for (std::size_t k = 1; k < path.size(); ++k) {
            ++edge_cover[static_cast<std::size_t>(path[k])];
            if (k + 1 < path.size()) {
                if (owner[static_cast<std::size_t>(path[k])] != -1) {
                    return fail("node interior to two branches");
                }
                owner[static_cast<std::size_t>(path[k])] = static_cast<int>(b);
            }
        }
    }
    if (root_branch == -1) {
        return fail("no root branch");
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<int>(v) != tree.root() && edge_cover[v] != 1) {
            return fail("edge covered " + std::to_string(edge_cover[v]) + " times");
        }
    }

    const auto depth = tree_depths(tree);
    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const int sa = pairs[static_cast<std::size_t>(a)].first;
        const int sb = pairs[static_cast<std::size_t>(b)].first;
        const int da = depth[static_cast<std::size_t>(sa)];
        const int db = depth[static_cast<std::size_t>(sb)];
        return da != db ? da < db : tree.node(sa).id < tree.node(sb).id;
    });
    std::vector<int> position(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        position[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }

    std::vector<Branch> branches;
    std::vector<int> parents;
    for (int b : order) {
        const auto [s, e] = pairs[static_cast<std::size_t>(b)];
        const auto& sn = tree.node(s);
        const auto& en = tree.node(e);
        branches.push_back(Branch{sn.id, en.id, sn.value, en.value, elders.count({sn.id, en.id}) != 0});
        if (b == root_branch) {
            parents.push_back(-1);
        } else {
            const int host = owner[static_cast<std::size_t>(s)];
            if (host == -1) {
                return fail("saddle " + std::to_string(sn.id) + " is not interior to any branch");
            }
            parents.push_back(position[static_cast<std::size_t>(host)]);
        }
    }
    return Bdt(std::move(branches), std::move(parents));
}

} // namespace

Bdt::Bdt(std::vector<Branch> branches, std::vector<int> parents)
    : branches_(std::move(branches)), parents_(std::move(parents))
{
    if (branches_.size() != parents_.size() || branches_.empty()) {
        throw std::invalid_argument("Bdt: branch and parent lists must be non-empty and equal length");
    }
    children_.assign(branches_.size(), {});
    depths_.assign(branches_.size(), 0);
    for (std::size_t i = 0; i < parents_.size(); ++i) {
        const int p = parents_[i];
        if ((i == 0) != (p == -1) || p >= static_cast<int>(i)) {
            throw std::invalid_argument("Bdt: node 0 must be the only root and parents must precede children");
        }
        if (p >= 0) {
            children_[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
            depths_[i] = depths_[static_cast<std::size_t>(p)] + 1;
        }
    }
}

bool Bdt::is_ancestor(int a, int b) const
{
    for (int v = parent(b); v != -1; v = parent(v)) {
        if (v == a) {
            return true;
        }
    }
    return false;
}

std::vector<std::pair<int, int>> Bdt::pairing() const
{
    std::vector<std::pair<int, int>> out;
    for (const auto& b : branches_) {
        out.emplace_back(b.saddle_id, b.extremum_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string Bdt::to_string() const
{
    auto rec = [&](auto&& self, int v) -> std::string {
        const auto& b = branch(v);
        std::string out = "(" + std::to_string(b.saddle_id) + ":" + fmt_value(b.saddle_value) + ", " +
                          std::to_string(b.extremum_id) + ":" + fmt_value(b.extremum_value);
        for (int c : children(v)) {
            out += " " + self(self, c);
        }
        return out + ")";
    };
    return rec(rec, 0);
}

std::vector<Bdt> enumerate_bdts(const MergeTree& tree)
{
    const auto leaves = leaves_below(tree);
    const auto elders = elder_pairs(tree);
    std::vector<Bdt> out;

    // Copy fan-out: when a branch is placed, one copy per combination of
    // extremum choices for the saddles interior to it.
    auto expand = [&](auto&& self, std::vector<std::pair<int, int>>& pairs, std::size_t next) -> void {
        if (next == pairs.size()) {
            std::string error;
            out.push_back(build_bdt(tree, pairs, elders, &error));
            if (!error.empty()) {
                throw std::logic_error("enumerate_bdts produced an invalid decomposition: " + error);
            }
            return;
        }
        const auto [s, e] = pairs[next];
        const auto path = branch_path(tree, s, e);
        std::vector<int> interior(path.begin() + 1, path.end() - 1);
        std::vector<const std::vector<int>*> options;
        for (std::size_t k = 0; k < interior.size(); ++k) {
            const auto& node = tree.node(interior[k]);
            const int on_path = path[k + 2];
            const int side = node.children[0] == on_path ? node.children[1] : node.children[0];
            options.push_back(&leaves[static_cast<std::size_t>(side)]);
        }

        std::vector<std::size_t> choice(options.size(), 0);
        const std::size_t base = pairs.size();
        // Odometer over the combinations, last saddle fastest.
        auto advance = [&] {
            for (std::size_t k = options.size(); k-- > 0;) {
                if (++choice[k] < options[k]->size()) {
                    return true;
                }
                choice[k] = 0;
            }
            return false;
        };
        do {
            pairs.resize(base);
            for (std::size_t k = 0; k < options.size(); ++k) {
                pairs.emplace_back(interior[k], (*options[k])[choice[k]]);
            }
            self(self, pairs, next + 1);
        } while (advance());
        pairs.resize(base);
    };

    for (int leaf : leaves[static_cast<std::size_t>(tree.root())]) {
        std::vector<std::pair<int, int>> pairs{{tree.root(), leaf}};
        expand(expand, pairs, 0);
    }
    return out;
}

Bdt bdt_from_pairing(const MergeTree& tree, const std::vector<std::pair<int, int>>& pairing)
{
    std::vector<std::pair<int, int>> pairs;
    for (const auto& [s, e] : pairing) {
        pairs.emplace_back(tree.index_of(s), tree.index_of(e));
    }
    std::string error;
    auto bdt = build_bdt(tree, pairs, elder_pairs(tree), &error);
    if (!error.empty()) {
        throw std::invalid_argument("bdt_from_pairing: " + error);
    }
    return bdt;
}

Bdt persistence_bdt(const MergeTree& tree)
{
    std::vector<std::pair<int, int>> pairing;
    for (const auto& p : elder_rule_diagram(tree).pairs) {
        pairing.emplace_back(p.saddle_id, p.extremum_id);
    }
    return bdt_from_pairing(tree, pairing);
}

bool validate_bdt(const MergeTree& tree, const Bdt& bdt)
{
    if (bdt.size() * 2 != tree.size()) {
        return false;
    }
    std::vector<std::pair<int, int>> pairs;
    std::map<int, int> by_saddle;
    for (int i = 0; i < bdt.size(); ++i) {
        const auto& b = bdt.branch(i);
        int s = -1;
        int e = -1;
        try {
            s = tree.index_of(b.saddle_id);
            e = tree.index_of(b.extremum_id);
        } catch (const std::out_of_range&) {
            return false;
        }
        if (tree.node(s).value != b.saddle_value || tree.node(e).value != b.extremum_value) {
            return false;
        }
        if ((i == 0) != (s == tree.root())) {
            return false;
        }
        pairs.emplace_back(s, e);
        by_saddle[b.saddle_id] = i;
    }
    std::string error;
    const auto rebuilt = build_bdt(tree, pairs, elder_pairs(tree), &error);
    if (!error.empty()) {
        return false;
    }
    // Parent relation must agree with interiority in the merge tree.
    for (int i = 0; i < rebuilt.size(); ++i) {
        const auto& b = rebuilt.branch(i);
        const int mine = by_saddle.at(b.saddle_id);
        const int expected_parent = rebuilt.parent(i);
        const int actual_parent = bdt.parent(mine);
        if (expected_parent == -1 || actual_parent == -1) {
            if (expected_parent != actual_parent) {
                return false;
            }
            continue;
        }
        if (bdt.branch(actual_parent).saddle_id != rebuilt.branch(expected_parent).saddle_id) {
            return false;
        }
    }
    return true;
}

std::string canonical_form(const Bdt& bdt)
{
    auto rec = [&](auto&& self, int v) -> std::string {
        const auto& b = bdt.branch(v);
        std::vector<std::string> kids;
        for (int c : bdt.children(v)) {
            kids.push_back(self(self, c));
        }
        std::sort(kids.begin(), kids.end());
        std::string out = "(" + fmt_value(b.saddle_value) + "," + fmt_value(b.extremum_value);
        for (const auto& k : kids) {
            out += k;
        }
        return out + ")";
    };
    return rec(rec, 0);
}

} // namespace mtmd

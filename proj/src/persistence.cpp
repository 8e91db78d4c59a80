#include "mtmd/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace mtmd {

namespace {

/// Hopcroft-Karp maximum matching on a bipartite graph with `left` x `right`
/// vertices, both zero-based.
class BipartiteMatcher {
public:
    BipartiteMatcher(std::size_t left, std::size_t right)
        : adj_(left), pair_left_(left, kNil), pair_right_(right, kNil), dist_(left, 0)
    {
    }

    void add_edge(std::size_t u, std::size_t v) { adj_[u].push_back(v); }

    std::size_t max_matching()
    {
        std::size_t size = 0;
        while (bfs()) {
            for (std::size_t u = 0; u < adj_.size(); ++u) {
                if (pair_left_[u] == kNil && dfs(u)) {
                    ++size;
                }
            }
        }
        return size;
    }

private:
    static constexpr std::size_t kNil = std::numeric_limits<std::size_t>::max();
    static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

    bool bfs()
    {
        std::queue<std::size_t> q;
        bool found = false;
        for (std::size_t u = 0; u < adj_.size(); ++u) {
            if (pair_left_[u] == kNil) {
                dist_[u] = 0;
                q.push(u);
            } else {
                dist_[u] = kInf;
            }
        }
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (auto v : adj_[u]) {
                const auto w = pair_right_[v];
                if (w == kNil) {
                    found = true;
                } else if (dist_[w] == kInf) {
                    dist_[w] = dist_[u] + 1;
                    q.push(w);
                }
            }
        }
        return found;
    }

    bool dfs(std::size_t u)
    {
        for (auto v : adj_[u]) {
            const auto w = pair_right_[v];
            if (w == kNil || (dist_[w] == dist_[u] + 1 && dfs(w))) {
                pair_left_[u] = v;
                pair_right_[v] = u;
                return true;
            }
        }
        dist_[u] = kInf;
        return false;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> pair_left_;
    std::vector<std::size_t> pair_right_;
    std::vector<std::size_t> dist_;
};

double relabel_cost(const PersistencePair& x, const PersistencePair& y)
{
    return std::max(std::abs(x.saddle_value - y.saddle_value), std::abs(x.extremum_value - y.extremum_value));
}

double removal_cost(const PersistencePair& x)
{
    return 0.5 * std::abs(x.saddle_value - x.extremum_value);
}

bool feasible(const PersistenceDiagram& a, const PersistenceDiagram& b, double delta)
{
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    // Left: points of a, then diagonal slots for b. Right: points of b, then
    // diagonal slots for a.
    BipartiteMatcher m(n1 + n2, n2 + n1);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            if (relabel_cost(a.pairs[i], b.pairs[j]) <= delta) {
                m.add_edge(i, j);
            }
        }
        if (removal_cost(a.pairs[i]) <= delta) {
            m.add_edge(i, n2 + i);
        }
    }
    for (std::size_t j = 0; j < n2; ++j) {
        if (removal_cost(b.pairs[j]) <= delta) {
            m.add_edge(n1 + j, j);
        }
        for (std::size_t i = 0; i < n1; ++i) {
            m.add_edge(n1 + j, n2 + i);
        }
    }
    return m.max_matching() == n1 + n2;
}

} // namespace

const PersistencePair* PersistenceDiagram::global_pair() const
{
    for (const auto& p : pairs) {
        if (p.is_global) {
            return &p;
        }
    }
    return nullptr;
}

PersistenceDiagram elder_rule_diagram(const MergeTree& tree)
{
    PersistenceDiagram dgm;
    std::vector<int> elder(static_cast<std::size_t>(tree.size()), -1);

    auto visit = [&](auto&& self, int v) -> int {
        const auto& node = tree.node(v);
        if (node.children.empty()) {
            return elder[static_cast<std::size_t>(v)] = v;
        }
        if (node.kind == NodeKind::root) {
            return elder[static_cast<std::size_t>(v)] = self(self, node.children.front());
        }
        const int a = self(self, node.children[0]);
        const int b = self(self, node.children[1]);
        const int older = tree.higher(a, b) ? a : b;
        const int younger = older == a ? b : a;
        dgm.pairs.push_back(PersistencePair{node.value, tree.node(younger).value, node.id,
                                            tree.node(younger).id, false});
        return elder[static_cast<std::size_t>(v)] = older;
    };
    const int top = visit(visit, tree.root());
    const auto& r = tree.node(tree.root());
    dgm.pairs.push_back(PersistencePair{r.value, tree.node(top).value, r.id, tree.node(top).id, true});
    return dgm;
}

double pair_cost(const std::optional<PersistencePair>& x, const std::optional<PersistencePair>& y)
{
    if (x && y) {
        return relabel_cost(*x, *y);
    }
    if (x) {
        return removal_cost(*x);
    }
    if (y) {
        return removal_cost(*y);
    }
    throw std::invalid_argument("pair_cost: both sides are the empty node");
}

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b)
{
    std::vector<double> candidates{0.0};
    for (const auto& x : a.pairs) {
        candidates.push_back(removal_cost(x));
        for (const auto& y : b.pairs) {
            candidates.push_back(relabel_cost(x, y));
        }
    }
    for (const auto& y : b.pairs) {
        candidates.push_back(removal_cost(y));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // The largest candidate is always feasible (everything to the diagonal
    // is covered by the removal costs).
    std::size_t lo = 0;
    std::size_t hi = candidates.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feasible(a, b, candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return candidates[lo];
}

std::string diagram_to_csv(const PersistenceDiagram& diagram)
{
    auto fmt = [](double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    std::string out = "saddle,extremum,is_global\n";
    for (const auto& p : diagram.pairs) {
        out += fmt(p.saddle_value) + "," + fmt(p.extremum_value) + "," + (p.is_global ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace mtmd

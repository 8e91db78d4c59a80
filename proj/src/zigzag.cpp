#include "mtmd/zigzag.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace mtmd {

namespace {

std::string fmt(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::size_t at(int i)
{
    return static_cast<std::size_t>(i);
}

void snapshot(const WorkingTree& tree, ZigzagDiagram& diagram, const std::string& op)
{
    std::vector<double> row(at(2 * tree.size()), 0.0);
    for (int k = 0; k < tree.size(); ++k) {
        row[at(2 * k)] = tree.saddle[at(k)];
        row[at(2 * k + 1)] = tree.extremum[at(k)];
    }
    diagram.trace.push_back(std::to_string(diagram.values.size()) + " " + op);
    diagram.values.push_back(std::move(row));
}

/// Source index -> target index (or kEmpty), and the reverse. Throws unless
/// every node on both sides appears in exactly one pair.
void index_matching(const Matching& matching, const Bdt& source, const Bdt& target, std::vector<int>& fwd,
                    std::vector<int>& bwd)
{
    constexpr int unset = -2;
    fwd.assign(at(source.size()), unset);
    bwd.assign(at(target.size()), unset);
    for (const auto& p : matching) {
        if (p.left == kEmpty && p.right == kEmpty) {
            throw std::invalid_argument("zigzag: pair of two empty nodes");
        }
        if (p.left != kEmpty) {
            if (p.left < 0 || p.left >= source.size() || fwd[at(p.left)] != unset) {
                throw std::invalid_argument("zigzag: bad or repeated source node in matching");
            }
            fwd[at(p.left)] = p.right;
        }
        if (p.right != kEmpty) {
            if (p.right < 0 || p.right >= target.size() || bwd[at(p.right)] != unset) {
                throw std::invalid_argument("zigzag: bad or repeated target node in matching");
            }
            bwd[at(p.right)] = p.left;
        }
    }
    if (std::count(fwd.begin(), fwd.end(), unset) != 0 || std::count(bwd.begin(), bwd.end(), unset) != 0) {
        throw std::invalid_argument("zigzag: matching is incomplete");
    }
    if (fwd[0] != 0) {
        throw std::invalid_argument("zigzag: roots must be matched to each other");
    }
}

} // namespace

int WorkingTree::depth(int v) const
{
    int d = 0;
    for (int p = parent[at(v)]; p != -1; p = parent[at(p)]) {
        ++d;
    }
    return d;
}

bool WorkingTree::is_ancestor(int a, int b) const
{
    for (int v = b; v != -1; v = parent[at(v)]) {
        if (v == a) {
            return true;
        }
    }
    return false;
}

Bdt WorkingTree::to_bdt() const
{
    std::vector<Branch> branches;
    std::vector<int> parents;
    std::vector<int> order{0};
    std::vector<int> index(at(size()), -1);
    index[0] = 0;
    for (std::size_t q = 0; q < order.size(); ++q) {
        const int v = order[q];
        branches.push_back(Branch{v, v, saddle[at(v)], extremum[at(v)], false});
        parents.push_back(v == 0 ? -1 : index[at(parent[at(v)])]);
        for (int c = 0; c < size(); ++c) {
            if (present[at(c)] && parent[at(c)] == v) {
                index[at(c)] = static_cast<int>(order.size());
                order.push_back(c);
            }
        }
    }
    return Bdt(std::move(branches), std::move(parents));
}

MovementPath movement_path(const WorkingTree& tree, int mover, int target_parent)
{
    if (target_parent < 0 || target_parent >= tree.size() || !tree.present[at(target_parent)]) {
        throw std::invalid_argument("movement_path: target parent is not in the tree");
    }
    if (tree.is_ancestor(mover, target_parent)) {
        throw std::invalid_argument("movement_path: target parent lies below the moving branch");
    }
    MovementPath out;
    const int start = tree.parent[at(mover)];
    if (start == target_parent) {
        return out;
    }
    std::vector<int> up;
    for (int v = start; v != -1; v = tree.parent[at(v)]) {
        up.push_back(v);
    }
    std::vector<int> down;
    int lca = -1;
    for (int v = target_parent; v != -1; v = tree.parent[at(v)]) {
        if (std::find(up.begin(), up.end(), v) != up.end()) {
            lca = v;
            break;
        }
        down.push_back(v);
    }
    for (int v : up) {
        out.path.push_back(v);
        if (v == lca) {
            break;
        }
    }
    out.path.insert(out.path.end(), down.rbegin(), down.rend());
    out.intersection = lca;
    return out;
}

EditScript build_edit_script(const Matching& matching, const Bdt& source, const Bdt& target)
{
    std::vector<int> fwd;
    std::vector<int> bwd;
    index_matching(matching, source, target, fwd, bwd);

    EditScript script;
    for (int j = 0; j < target.size(); ++j) {
        if (bwd[at(j)] == kEmpty) {
            script.insertions.push_back(j);
        }
    }
    std::stable_sort(script.insertions.begin(), script.insertions.end(),
                     [&](int a, int b) { return target.depth(a) < target.depth(b); });

    for (int i = 0; i < source.size(); ++i) {
        const int j = fwd[at(i)];
        if (j == kEmpty) {
            script.deletions.push_back(i);
            continue;
        }
        const int sp = source.parent(i);
        const bool stays = sp == -1 || fwd[at(sp)] == target.parent(j);
        (stays ? script.relabels : script.movements).emplace_back(i, j);
    }
    std::stable_sort(script.deletions.begin(), script.deletions.end(),
                     [&](int a, int b) { return source.depth(a) > source.depth(b); });
    return script;
}

void apply_movements_ordered(WorkingTree& tree, const std::vector<std::pair<int, int>>& movements,
                             const std::vector<int>& target_slot, const Bdt& target, ZigzagDiagram& diagram)
{
    std::vector<std::size_t> pending(movements.size());
    for (std::size_t k = 0; k < pending.size(); ++k) {
        pending[k] = k;
    }
    while (!pending.empty()) {
        std::vector<std::size_t> deferred;
        std::vector<std::size_t> round = pending;
        while (!round.empty()) {
            auto best = std::min_element(round.begin(), round.end(), [&](std::size_t a, std::size_t b) {
                const int da = tree.depth(movements[a].first);
                const int db = tree.depth(movements[b].first);
                return da != db ? da < db : a < b;
            });
            const std::size_t k = *best;
            round.erase(best);

            const auto [u, j] = movements[k];
            const int tp = target_slot[at(target.parent(j))];
            if (tree.is_ancestor(u, tp)) {
                deferred.push_back(k);
                continue;
            }
            const auto route = movement_path(tree, u, tp);
            for (int w : route.path) {
                if (w == route.intersection) {
                    continue;
                }
                const double meet = tree.saddle[at(w)];
                tree.saddle[at(u)] = meet;
                diagram.swaps.push_back(SwapRecord{diagram.steps(), u, w, meet});
                snapshot(tree, diagram, "swap " + std::to_string(u) + " " + std::to_string(w) + " " + fmt(meet));
            }
            tree.parent[at(u)] = tp;
            tree.saddle[at(u)] = target.branch(j).saddle_value;
            tree.extremum[at(u)] = target.branch(j).extremum_value;
            snapshot(tree, diagram,
                     "move " + std::to_string(u) + " " + std::to_string(tp) + " " + fmt(tree.saddle[at(u)]) + " " +
                         fmt(tree.extremum[at(u)]));
        }
        if (deferred.size() == pending.size()) {
            throw std::logic_error("apply_movements_ordered: no pending movement can be applied");
        }
        pending = std::move(deferred);
    }
}

ZigzagDiagram build_zigzag(const Matching& matching, const Bdt& source, const Bdt& target)
{
    const auto script = build_edit_script(matching, source, target);
    std::vector<int> fwd;
    std::vector<int> bwd;
    index_matching(matching, source, target, fwd, bwd);

    const int ns = source.size();
    const int nt = target.size();
    std::vector<int> target_slot(at(nt));
    for (int j = 0; j < nt; ++j) {
        target_slot[at(j)] = bwd[at(j)] == kEmpty ? ns + j : bwd[at(j)];
    }

    WorkingTree tree;
    tree.parent.assign(at(ns + nt), -1);
    tree.saddle.assign(at(ns + nt), 0.0);
    tree.extremum.assign(at(ns + nt), 0.0);
    tree.present.assign(at(ns + nt), 0);

    ZigzagDiagram diagram;
    diagram.active.assign(at(2 * (ns + nt)), 0);
    for (int i = 0; i < ns; ++i) {
        tree.parent[at(i)] = source.parent(i);
        tree.saddle[at(i)] = source.branch(i).saddle_value;
        tree.extremum[at(i)] = source.branch(i).extremum_value;
        tree.present[at(i)] = 1;
        diagram.active[at(2 * i)] = diagram.active[at(2 * i + 1)] = 1;
    }
    for (int j : script.insertions) {
        const int s = ns + j;
        tree.saddle[at(s)] = tree.extremum[at(s)] = target.branch(j).midpoint();
        diagram.active[at(2 * s)] = diagram.active[at(2 * s + 1)] = 1;
    }
    snapshot(tree, diagram, "start");

    for (int j : script.insertions) {
        const int s = ns + j;
        tree.parent[at(s)] = target_slot[at(target.parent(j))];
        tree.saddle[at(s)] = target.branch(j).saddle_value;
        tree.extremum[at(s)] = target.branch(j).extremum_value;
        tree.present[at(s)] = 1;
        snapshot(tree, diagram,
                 "insert " + std::to_string(s) + " " + fmt(tree.saddle[at(s)]) + " " + fmt(tree.extremum[at(s)]));
    }
    for (auto [i, j] : script.relabels) {
        tree.saddle[at(i)] = target.branch(j).saddle_value;
        tree.extremum[at(i)] = target.branch(j).extremum_value;
        snapshot(tree, diagram,
                 "relabel " + std::to_string(i) + " " + fmt(tree.saddle[at(i)]) + " " + fmt(tree.extremum[at(i)]));
    }
    apply_movements_ordered(tree, script.movements, target_slot, target, diagram);
    for (int i : script.deletions) {
        for (int c = 0; c < tree.size(); ++c) {
            if (tree.present[at(c)] && tree.parent[at(c)] == i) {
                throw std::logic_error("build_zigzag: deleted branch still has children");
            }
        }
        const double mid = 0.5 * (tree.saddle[at(i)] + tree.extremum[at(i)]);
        tree.saddle[at(i)] = tree.extremum[at(i)] = mid;
        tree.present[at(i)] = 0;
        snapshot(tree, diagram, "delete " + std::to_string(i) + " " + fmt(mid));
    }
    diagram.final_tree = std::move(tree);
    return diagram;
}

double trajectory_cost(const ZigzagDiagram& diagram)
{
    const int steps = diagram.steps();
    if (steps == 0) {
        return 0.0;
    }
    const std::size_t width = diagram.active.size();
    std::vector<std::vector<std::pair<int, int>>> cross(at(steps));
    for (const auto& s : diagram.swaps) {
        if (s.step + 1 < steps) {
            cross[at(s.step)].emplace_back(2 * s.moving, 2 * s.passed);
            cross[at(s.step)].emplace_back(2 * s.passed, 2 * s.moving);
        }
    }

    std::vector<double> hi = diagram.values.back();
    std::vector<double> lo = diagram.values.back();
    double cost = 0.0;
    auto fold = [&](int t) {
        for (std::size_t v = 0; v < width; ++v) {
            if (diagram.active[v]) {
                const double x = diagram.values[at(t)][v];
                cost = std::max({cost, hi[v] - x, x - lo[v]});
            }
        }
    };
    fold(steps - 1);
    for (int t = steps - 2; t >= 0; --t) {
        const auto& row = diagram.values[at(t)];
        std::vector<double> nhi(width);
        std::vector<double> nlo(width);
        for (std::size_t v = 0; v < width; ++v) {
            nhi[v] = std::max(row[v], hi[v]);
            nlo[v] = std::min(row[v], lo[v]);
        }
        for (auto [from, to] : cross[at(t)]) {
            nhi[at(from)] = std::max(nhi[at(from)], hi[at(to)]);
            nlo[at(from)] = std::min(nlo[at(from)], lo[at(to)]);
        }
        hi = std::move(nhi);
        lo = std::move(nlo);
        fold(t);
    }
    return cost;
}

double matching_cost(const Matching& matching, const Bdt& left, const Bdt& right)
{
    const double forward = trajectory_cost(build_zigzag(matching, left, right));
    const double backward = trajectory_cost(build_zigzag(reversed(matching), right, left));
    return std::min(forward, backward);
}

} // namespace mtmd

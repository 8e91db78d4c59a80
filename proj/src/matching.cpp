#include "mtmd/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>

#include "mtmd/zigzag.hpp"

namespace mtmd {

namespace {

std::size_t at(int i)
{
    return static_cast<std::size_t>(i);
}

double relabel_cost(const Branch& a, const Branch& b)
{
    return std::max(std::abs(a.saddle_value - b.saddle_value), std::abs(a.extremum_value - b.extremum_value));
}

double removal_cost(const Branch& a)
{
    return 0.5 * std::abs(a.persistence());
}

struct State {
    std::vector<int> assign;   // right index (or kEmpty) per processed left position
    std::uint64_t used = 0;    // right nodes already taken
    double cost = 0.0;         // max pair cost so far
    double key = 0.0;
    int remaining = 0;
    bool complete = false;
    bool final = false;
};

struct Entry {
    double key;
    int remaining;
    std::size_t seq;
    std::size_t index;

    bool operator>(const Entry& o) const
    {
        if (key != o.key) {
            return key > o.key;
        }
        if (remaining != o.remaining) {
            return remaining > o.remaining;
        }
        return seq > o.seq;
    }
};

class Search {
public:
    Search(const Bdt& left, const Bdt& right, const AStarOptions& options)
        : left_(left), right_(right), options_(options)
    {
        if (right.size() > 64) {
            throw std::invalid_argument("astar: at most 64 branches per tree");
        }
        for (int i = 1; i < left.size(); ++i) {
            order_.push_back(i);
        }
        std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
            return left.branch(a).persistence() > left.branch(b).persistence();
        });
        order_.insert(order_.begin(), 0);
    }

    AStarResult run()
    {
        State root;
        root.assign = {0};
        root.used = 1;
        root.cost = relabel_cost(left_.branch(0), right_.branch(0));
        root.remaining = left_.size() + right_.size() - 2;
        if (!finish_if_exhausted(root)) {
            return result_;
        }
        if (!root.complete) {
            const double h = heuristic(root);
            if (std::isinf(h)) {
                return result_;
            }
            root.key = std::max(root.cost, h);
        }
        push(std::move(root));

        while (!open_.empty()) {
            const Entry top = open_.top();
            open_.pop();
            const double cut = cutoff();
            if (top.key > cut) {
                return result_;
            }
            State s = std::move(states_[top.index]);
            if (s.final) {
                return accept(s, s.key, cut);
            }
            if (s.complete) {
                ++result_.stats.final_evaluations;
                const double truth = matching_cost(to_matching(s), left_, right_);
                if (open_.empty() || truth <= open_.top().key) {
                    return accept(s, truth, cut);
                }
                s.final = true;
                s.key = truth;
                push(std::move(s));
                continue;
            }
            expand(s);
        }
        return result_;
    }

private:
    double cutoff() const
    {
        double c = options_.cutoff;
        if (options_.shared_cutoff != nullptr) {
            c = std::min(c, options_.shared_cutoff->load(std::memory_order_relaxed));
        }
        return c;
    }

    AStarResult accept(const State& s, double cost, double cut)
    {
        if (cost > cut) {
            return result_;
        }
        result_.cost = cost;
        result_.complete = true;
        result_.matching = to_matching(s);
        return result_;
    }

    Matching to_matching(const State& s) const
    {
        Matching m;
        for (std::size_t k = 0; k < s.assign.size(); ++k) {
            m.push_back(MatchPair{order_[k], s.assign[k], MatchCategory::relabel});
        }
        for (int j = 0; j < right_.size(); ++j) {
            if (!(s.used >> j & 1U)) {
                m.push_back(MatchPair{kEmpty, j, MatchCategory::insertion});
            }
        }
        classify(m, left_, right_);
        return m;
    }

    void push(State s)
    {
        ++result_.stats.pushed;
        const Entry e{s.key, s.remaining, seq_++, states_.size()};
        states_.push_back(std::move(s));
        open_.push(e);
    }

    /// Size-difference bound restricted to removable nodes; +inf when the
    /// surplus side cannot shed enough nodes.
    double heuristic(const State& s) const
    {
        std::vector<double> lhs;
        std::vector<double> rhs;
        int nl = 0;
        int nr = 0;
        for (std::size_t k = s.assign.size(); k < order_.size(); ++k) {
            ++nl;
            if (left_.branch(order_[k]).elder_pair) {
                lhs.push_back(removal_cost(left_.branch(order_[k])));
            }
        }
        for (int j = 0; j < right_.size(); ++j) {
            if (!(s.used >> j & 1U)) {
                ++nr;
                if (right_.branch(j).elder_pair) {
                    rhs.push_back(removal_cost(right_.branch(j)));
                }
            }
        }
        const int n = std::abs(nl - nr);
        if (n == 0) {
            return 0.0;
        }
        auto& pool = nl > nr ? lhs : rhs;
        if (static_cast<int>(pool.size()) < n) {
            return std::numeric_limits<double>::infinity();
        }
        std::nth_element(pool.begin(), pool.begin() + (n - 1), pool.end());
        return pool[at(n - 1)];
    }

    /// Once every left node is placed, the leftover right nodes are inserted.
    /// Returns false if one of them cannot be.
    bool finish_if_exhausted(State& s) const
    {
        if (s.assign.size() < order_.size()) {
            return true;
        }
        for (int j = 0; j < right_.size(); ++j) {
            if (!(s.used >> j & 1U)) {
                if (!right_.branch(j).elder_pair) {
                    return false;
                }
                s.cost = std::max(s.cost, removal_cost(right_.branch(j)));
            }
        }
        s.complete = true;
        s.remaining = 0;
        s.key = s.cost;
        return true;
    }

    bool violates(const State& s, int u, int v) const
    {
        for (std::size_t k = 0; k < s.assign.size(); ++k) {
            const int a = order_[k];
            const int b = s.assign[k];
            if (b == kEmpty) {
                continue;
            }
            if ((left_.is_ancestor(u, a) && right_.is_ancestor(b, v)) ||
                (left_.is_ancestor(a, u) && right_.is_ancestor(v, b))) {
                return true;
            }
        }
        return false;
    }

    void offer(const State& s, int v, double pair)
    {
        State child;
        child.assign = s.assign;
        child.assign.push_back(v);
        child.used = s.used;
        if (v != kEmpty) {
            child.used |= std::uint64_t{1} << v;
        }
        child.cost = std::max(s.cost, pair);
        child.remaining = s.remaining - (v == kEmpty ? 1 : 2);
        if (!finish_if_exhausted(child)) {
            ++result_.stats.pruned;
            return;
        }
        if (!child.complete) {
            const double h = heuristic(child);
            if (std::isinf(h)) {
                ++result_.stats.pruned;
                return;
            }
            child.key = std::max(child.cost, h);
        }
        if (child.key > cutoff()) {
            ++result_.stats.pruned;
            return;
        }
        push(std::move(child));
    }

    void expand(const State& s)
    {
        ++result_.stats.expanded;
        const int u = order_[s.assign.size()];
        const Branch& bu = left_.branch(u);
        if (bu.elder_pair) {
            offer(s, kEmpty, removal_cost(bu));
        }
        for (int v = 1; v < right_.size(); ++v) {
            if (s.used >> v & 1U) {
                continue;
            }
            const Branch& bv = right_.branch(v);
            if (options_.prune_relabel_range && bu.elder_pair && bv.elder_pair && !relabel_in_range(bu, bv) &&
                !relabel_in_range(bv, bu)) {
                ++result_.stats.pruned;
                continue;
            }
            if (options_.prune_ancestors && violates(s, u, v)) {
                ++result_.stats.pruned;
                continue;
            }
            offer(s, v, relabel_cost(bu, bv));
        }
    }

    const Bdt& left_;
    const Bdt& right_;
    const AStarOptions& options_;
    std::vector<int> order_;
    std::vector<State> states_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open_;
    std::size_t seq_ = 0;
    AStarResult result_;
};

} // namespace

bool relabel_in_range(const Branch& u, const Branch& v)
{
    const double delta = 0.5 * std::abs(u.extremum_value - u.saddle_value);
    return u.saddle_value - delta <= v.saddle_value && v.saddle_value <= u.saddle_value + delta &&
           u.extremum_value - delta <= v.extremum_value && v.extremum_value <= u.extremum_value + delta;
}

double heuristic_size_diff(const std::vector<double>& left_persistence, const std::vector<double>& right_persistence)
{
    const std::size_t nl = left_persistence.size();
    const std::size_t nr = right_persistence.size();
    if (nl == nr) {
        return 0.0;
    }
    std::vector<double> pool = nl > nr ? left_persistence : right_persistence;
    const std::size_t n = nl > nr ? nl - nr : nr - nl;
    std::sort(pool.begin(), pool.end());
    return 0.5 * std::abs(pool[n - 1]);
}

bool ancestor_violation(const Matching& partial, const Bdt& left, const Bdt& right, int u, int v)
{
    for (const auto& p : partial) {
        if (p.left == kEmpty || p.right == kEmpty) {
            continue;
        }
        if ((left.is_ancestor(u, p.left) && right.is_ancestor(p.right, v)) ||
            (left.is_ancestor(p.left, u) && right.is_ancestor(v, p.right))) {
            return true;
        }
    }
    return false;
}

AStarResult astar(const Bdt& left, const Bdt& right, const AStarOptions& options)
{
    return Search(left, right, options).run();
}

void for_each_legal_matching(const Bdt& left, const Bdt& right, const std::function<void(const Matching&)>& visit)
{
    Matching current{MatchPair{0, 0, MatchCategory::relabel}};
    std::vector<char> used(at(right.size()), 0);
    used[0] = 1;

    auto rec = [&](auto&& self, int u) -> void {
        if (u == left.size()) {
            const std::size_t mark = current.size();
            for (int j = 1; j < right.size(); ++j) {
                if (!used[at(j)]) {
                    if (!right.branch(j).elder_pair) {
                        current.resize(mark);
                        return;
                    }
                    current.push_back(MatchPair{kEmpty, j, MatchCategory::insertion});
                }
            }
            Matching m = current;
            classify(m, left, right);
            visit(m);
            current.resize(mark);
            return;
        }
        if (left.branch(u).elder_pair) {
            current.push_back(MatchPair{u, kEmpty, MatchCategory::deletion});
            self(self, u + 1);
            current.pop_back();
        }
        for (int v = 1; v < right.size(); ++v) {
            if (used[at(v)]) {
                continue;
            }
            used[at(v)] = 1;
            current.push_back(MatchPair{u, v, MatchCategory::relabel});
            self(self, u + 1);
            current.pop_back();
            used[at(v)] = 0;
        }
    };
    rec(rec, 1);
}

} // namespace mtmd

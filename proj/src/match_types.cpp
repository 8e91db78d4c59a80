#include "mtmd/match_types.hpp"

#include <vector>

namespace mtmd {

void classify(Matching& matching, const Bdt& left, const Bdt& right)
{
    std::vector<int> image(static_cast<std::size_t>(left.size()), kEmpty);
    for (const auto& p : matching) {
        if (p.left != kEmpty) {
            image[static_cast<std::size_t>(p.left)] = p.right;
        }
    }
    for (auto& p : matching) {
        if (p.left == kEmpty) {
            p.category = MatchCategory::insertion;
        } else if (p.right == kEmpty) {
            p.category = MatchCategory::deletion;
        } else {
            const int lp = left.parent(p.left);
            const int rp = right.parent(p.right);
            const bool moves = lp != -1 && rp != -1 && image[static_cast<std::size_t>(lp)] != rp;
            const bool root_mismatch = (lp == -1) != (rp == -1);
            p.category = (moves || root_mismatch) ? MatchCategory::movement_relabel : MatchCategory::relabel;
        }
    }
}

bool is_valid_matching(const Matching& matching, const Bdt& left, const Bdt& right)
{
    std::vector<int> seen_left(static_cast<std::size_t>(left.size()), 0);
    std::vector<int> seen_right(static_cast<std::size_t>(right.size()), 0);
    bool roots = false;
    for (const auto& p : matching) {
        if (p.left == kEmpty && p.right == kEmpty) {
            return false;
        }
        if (p.left != kEmpty) {
            if (p.left < 0 || p.left >= left.size()) {
                return false;
            }
            ++seen_left[static_cast<std::size_t>(p.left)];
        }
        if (p.right != kEmpty) {
            if (p.right < 0 || p.right >= right.size()) {
                return false;
            }
            ++seen_right[static_cast<std::size_t>(p.right)];
        }
        if (p.left == 0 && p.right == 0) {
            roots = true;
        }
        if (p.right == kEmpty && !left.branch(p.left).elder_pair) {
            return false;
        }
        if (p.left == kEmpty && !right.branch(p.right).elder_pair) {
            return false;
        }
    }
    for (int c : seen_left) {
        if (c != 1) {
            return false;
        }
    }
    for (int c : seen_right) {
        if (c != 1) {
            return false;
        }
    }
    return roots;
}

Matching reversed(const Matching& matching)
{
    Matching out;
    out.reserve(matching.size());
    for (const auto& p : matching) {
        MatchCategory c = p.category;
        if (c == MatchCategory::insertion) {
            c = MatchCategory::deletion;
        } else if (c == MatchCategory::deletion) {
            c = MatchCategory::insertion;
        }
        out.push_back(MatchPair{p.right, p.left, c});
    }
    return out;
}

} // namespace mtmd

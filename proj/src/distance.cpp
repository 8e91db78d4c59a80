#include "mtmd/distance.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "mtmd/bdt.hpp"
#include "mtmd/zigzag.hpp"

namespace mtmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MergeTree split_form(const MergeTree& t)
{
    return t.orientation() == TreeOrientation::split ? t : t.as_split();
}

/// All BDTs with the persistence BDT moved to the front.
std::vector<Bdt> ordered_bdts(const MergeTree& tree)
{
    auto all = enumerate_bdts(tree);
    const auto canonical = persistence_bdt(tree).pairing();
    auto it = std::find_if(all.begin(), all.end(), [&](const Bdt& b) { return b.pairing() == canonical; });
    if (it != all.end()) {
        std::rotate(all.begin(), it, it + 1);
    }
    return all;
}

void lower_to(std::atomic<double>& target, double value)
{
    double cur = target.load();
    while (value < cur && !target.compare_exchange_weak(cur, value)) {
    }
}

} // namespace

DistanceResult merge_tree_matching_distance_detailed(const MergeTree& f, const MergeTree& g,
                                                     const DistanceOptions& options)
{
    const auto bf = ordered_bdts(split_form(f));
    const auto bg = ordered_bdts(split_form(g));
    const std::size_t total = bf.size() * bg.size();

    std::atomic<double> cutoff{kInf};
    std::atomic<std::size_t> next{0};
    std::vector<std::optional<AStarResult>> results(total);
    std::mutex stats_mutex;
    AStarStats stats;

    auto worker = [&] {
        AStarStats local;
        for (std::size_t k = next++; k < total; k = next++) {
            AStarOptions ao;
            ao.prune_relabel_range = options.prune;
            ao.prune_ancestors = options.prune;
            if (options.share_cutoff) {
                ao.shared_cutoff = &cutoff;
            }
            auto r = astar(bf[k / bg.size()], bg[k % bg.size()], ao);
            local += r.stats;
            if (r.complete) {
                if (options.share_cutoff) {
                    lower_to(cutoff, r.cost);
                }
                results[k] = std::move(r);
            }
        }
        std::lock_guard lock(stats_mutex);
        stats += local;
    };

    const unsigned jobs = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(total)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    DistanceResult out;
    out.distance = kInf;
    out.bdt_pairs = total;
    out.stats = stats;
    for (std::size_t k = 0; k < total; ++k) {
        if (results[k] && results[k]->cost < out.distance) {
            out.distance = results[k]->cost;
            out.left_bdt = static_cast<int>(k / bg.size());
            out.right_bdt = static_cast<int>(k % bg.size());
            out.matching = results[k]->matching;
        }
    }
    if (out.left_bdt < 0) {
        throw std::logic_error("merge_tree_matching_distance: no BDT pair produced a matching");
    }
    return out;
}

double merge_tree_matching_distance(const MergeTree& f, const MergeTree& g, const DistanceOptions& options)
{
    return merge_tree_matching_distance_detailed(f, g, options).distance;
}

double brute_force_distance(const MergeTree& f, const MergeTree& g)
{
    if (f.size() > 10 || g.size() > 10) {
        throw std::invalid_argument("brute_force_distance: trees must have at most 10 nodes");
    }
    const auto bf = enumerate_bdts(split_form(f));
    const auto bg = enumerate_bdts(split_form(g));
    double best = kInf;
    for (const auto& a : bf) {
        for (const auto& b : bg) {
            for_each_legal_matching(a, b, [&](const Matching& m) { best = std::min(best, matching_cost(m, a, b)); });
        }
    }
    return best;
}

SimplifiedReport simplified_distance_report(const MergeTree& f, const MergeTree& g, int target_nodes,
                                            const DistanceOptions& options)
{
    const auto sf = simplify_to_node_count(split_form(f), target_nodes);
    const auto sg = simplify_to_node_count(split_form(g), target_nodes);
    SimplifiedReport r;
    r.eps1 = sf.threshold;
    r.eps2 = sg.threshold;
    r.bound = 0.5 * std::max(r.eps1, r.eps2);
    r.nodes1 = sf.tree.size();
    r.nodes2 = sg.tree.size();
    r.distance = merge_tree_matching_distance(sf.tree, sg.tree, options);
    return r;
}

} // namespace mtmd

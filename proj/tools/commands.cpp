#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "mtmd/distance.hpp"
#include "mtmd/persistence.hpp"

namespace mtmd::cli {

namespace fs = std::filesystem;

std::string format_number(double v)
{
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TreeOrientation parse_kind(const std::string& kind)
{
    return kind == "join" ? TreeOrientation::join : TreeOrientation::split;
}

/// `.grid` files are extracted on the fly (split tree), anything else is read as a tree.
MergeTree load_tree(const fs::path& path)
{
    if (path.extension() == ".grid") {
        return extract_split_tree(triangulate(read_grid_file(path.string())));
    }
    return read_tree_file(path.string());
}

// Outputs of earlier runs that may sit next to the inputs.
bool skipped_extension(const fs::path& p)
{
    const auto ext = p.extension();
    return ext == ".csv" || ext == ".log" || ext == ".pgm";
}

struct Corpus {
    std::vector<std::string> names;
    std::vector<MergeTree> trees;
    std::vector<std::string> warnings;
};

Corpus load_corpus(const std::string& dir)
{
    if (!fs::is_directory(dir)) {
        throw DataError("not a directory: " + dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && !name.starts_with(".") && !skipped_extension(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    Corpus c;
    for (const auto& f : files) {
        try {
            c.trees.push_back(load_tree(f));
            c.names.push_back(f.filename().string());
        } catch (const std::exception& e) {
            c.warnings.push_back("skipped " + f.filename().string() + ": " + e.what());
        }
    }
    if (c.trees.empty()) {
        throw DataError("no readable tree files in " + dir);
    }
    return c;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) {
        throw DataError("cannot write " + path);
    }
}

/// Distances for every unordered pair, spread over `jobs` workers. Each slot
/// has exactly one writer, so the result does not depend on scheduling.
std::vector<double> pairwise(const std::vector<MergeTree>& trees, unsigned jobs)
{
    const std::size_t n = trees.size();
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            work.emplace_back(i, j);
        }
    }
    std::vector<double> d(n * n, 0.0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            const auto [i, j] = work[k];
            try {
                const double v = merge_tree_matching_distance(trees[i], trees[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::max(1U, jobs); ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return d;
}

std::string heatmap_pgm(const std::vector<double>& d, std::size_t n)
{
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    std::string img = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    for (double v : d) {
        const double t = *hi > *lo ? (v - *lo) / (*hi - *lo) : 0.0;
        img.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - t)))));
    }
    return img;
}

int cmd_extract(const std::string& in, const std::string& out_path, const std::string& kind, std::ostream& out)
{
    const auto field = triangulate(read_grid_file(in));
    const auto tree = parse_kind(kind) == TreeOrientation::join ? extract_join_tree(field) : extract_split_tree(field);
    write_tree_file(out_path, tree);
    out << "nodes=" << tree.size() << "\n";
    return kOk;
}

int cmd_simplify(const std::string& in, const std::string& out_path, int target, double threshold, std::ostream& out)
{
    const auto tree = load_tree(in);
    SimplifiedTree s;
    if (target > 0) {
        s = simplify_to_node_count(tree, target);
    } else {
        s = {simplify_persistence(tree, threshold), threshold};
    }
    write_tree_file(out_path, s.tree);
    out << "threshold=" << format_number(s.threshold) << " nodes=" << s.tree.size() << "\n";
    return kOk;
}

int cmd_dist(const std::string& a, const std::string& b, int simplify_to, bool bottleneck, unsigned jobs,
             std::ostream& out)
{
    const auto f = load_tree(a);
    const auto g = load_tree(b);
    DistanceOptions opts;
    opts.jobs = jobs;
    const auto r = simplified_distance_report(f, g, simplify_to, opts);
    out << "distance=" << format_number(r.distance) << " eps1=" << format_number(r.eps1)
        << " eps2=" << format_number(r.eps2) << " bound=" << format_number(r.bound) << "\n";
    if (bottleneck) {
        out << "bottleneck=" << format_number(bottleneck_distance(elder_rule_diagram(f.as_split()),
                                                                  elder_rule_diagram(g.as_split())))
            << "\n";
    }
    return kOk;
}

int cmd_diagram(const std::string& in, std::ostream& out)
{
    out << diagram_to_csv(elder_rule_diagram(load_tree(in).as_split()));
    return kOk;
}

int cmd_matrix(const std::string& dir, const std::string& csv, unsigned jobs, int simplify_to,
               const std::string& heatmap, std::ostream& err)
{
    auto corpus = load_corpus(dir);
    if (simplify_to > 0) {
        for (auto& t : corpus.trees) {
            t = simplify_to_node_count(t.as_split(), simplify_to).tree;
        }
    }
    const auto d = pairwise(corpus.trees, jobs);
    const std::size_t n = corpus.trees.size();
    std::ostringstream os;
    for (const auto& name : corpus.names) {
        os << "," << name;
    }
    os << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << corpus.names[i];
        for (std::size_t j = 0; j < n; ++j) {
            os << "," << format_number(d[i * n + j]);
        }
        os << "\n";
    }
    write_text(csv, os.str());
    if (!heatmap.empty()) {
        write_text(heatmap, heatmap_pgm(d, n));
    }
    if (!corpus.warnings.empty()) {
        std::string log;
        for (const auto& w : corpus.warnings) {
            err << "warning: " << w << "\n";
            log += w + "\n";
        }
        write_text(csv + ".log", log);
    }
    return kOk;
}

int cmd_synth_stability(const std::string& dir, int count, std::uint64_t seed, double eps, std::ostream& out)
{
    BaselineParams params;
    params.eps = eps;
    validate_baseline(params);
    fs::create_directories(dir);
    const auto base = synth_baseline(params);
    write_grid_file((fs::path(dir) / "baseline.grid").string(), base);

    // Amplitudes span [0.2, 3] eps so that the corpus covers both sides of
    // the instability threshold.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string manifest = "file,linf\nbaseline.grid,0\n";
    for (int k = 0; k < count; ++k) {
        const double amplitude = eps * (0.2 + 2.8 * unit(rng));
        const auto field = perturb_field(base, rng(), amplitude);
        char name[32];
        std::snprintf(name, sizeof name, "perturbed_%03d.grid", k);
        write_grid_file((fs::path(dir) / name).string(), field);
        manifest += std::string(name) + "," + format_number(linf_distance(base, field)) + "\n";
    }
    write_text((fs::path(dir) / "manifest.csv").string(), manifest);
    out << "fields=" << count + 1 << "\n";
    return kOk;
}

int cmd_bench(const std::string& dir, const std::vector<int>& sizes, int pairs, std::ostream& out)
{
    const auto corpus = load_corpus(dir);
    std::vector<std::pair<std::size_t, std::size_t>> sample;
    for (std::size_t i = 0; i < corpus.trees.size() && static_cast<int>(sample.size()) < pairs; ++i) {
        for (std::size_t j = i + 1; j < corpus.trees.size() && static_cast<int>(sample.size()) < pairs; ++j) {
            sample.emplace_back(i, j);
        }
    }
    if (sample.empty()) {
        throw DataError("bench needs at least two trees");
    }
    out << "size,mean_seconds,mean_eps\n";
    for (int size : sizes) {
        std::vector<MergeTree> trees;
        double eps_sum = 0.0;
        for (const auto& t : corpus.trees) {
            auto s = simplify_to_node_count(t.as_split(), size);
            eps_sum += s.threshold;
            trees.push_back(std::move(s.tree));
        }
        double seconds = 0.0;
        for (const auto& [i, j] : sample) {
            const auto t0 = std::chrono::steady_clock::now();
            merge_tree_matching_distance(trees[i], trees[j]);
            seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        out << size << "," << format_number(seconds / static_cast<double>(sample.size())) << ","
            << format_number(eps_sum / static_cast<double>(trees.size())) << "\n";
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Merge tree matching distance between scalar fields", "mtmd"};
    app.require_subcommand(1);

    std::string in, in2, out_path, kind = "split", dir, heatmap;
    int target = 0;
    double threshold = 0.0;
    int simplify_to = 14;
    bool with_bottleneck = false;
    unsigned jobs = 1;
    int count = 36;
    std::uint64_t seed = 1;
    double eps = 0.1;
    std::vector<int> sizes{8, 10, 12, 14};
    int pairs = 10;

    auto* extract = app.add_subcommand("extract", "Extract a merge tree from a grid file");
    extract->add_option("grid", in)->required();
    extract->add_option("out", out_path)->required();
    extract->add_option("--kind", kind)->check(CLI::IsMember({"split", "join"}));

    auto* simplify = app.add_subcommand("simplify", "Persistence-simplify a tree");
    simplify->add_option("tree", in)->required();
    simplify->add_option("out", out_path)->required();
    auto* how = simplify->add_option_group("how", "exactly one of");
    how->add_option("--to", target, "target node count")->check(CLI::PositiveNumber);
    how->add_option("--threshold", threshold, "persistence threshold")->check(CLI::NonNegativeNumber);
    how->require_option(1);

    auto* dist = app.add_subcommand("dist", "Distance between two trees");
    dist->add_option("a", in)->required();
    dist->add_option("b", in2)->required();
    dist->add_option("--simplify-to", simplify_to)->check(CLI::PositiveNumber);
    dist->add_flag("--bottleneck", with_bottleneck);
    dist->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

    auto* diagram = app.add_subcommand("diagram", "Print the elder-rule persistence diagram");
    diagram->add_option("tree", in)->required();

    auto* matrix = app.add_subcommand("matrix", "Pairwise distance matrix of a directory");
    matrix->add_option("dir", dir)->required();
    matrix->add_option("out", out_path)->required();
    matrix->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
    matrix->add_option("--simplify-to", simplify_to)->check(CLI::NonNegativeNumber);
    matrix->add_option("--heatmap", heatmap);

    auto* synth = app.add_subcommand("synth-stability", "Write the baseline field and perturbed copies");
    synth->add_option("dir", dir)->required();
    synth->add_option("--count", count)->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", seed);
    synth->add_option("--eps", eps)->check(CLI::PositiveNumber);

    auto* bench = app.add_subcommand("bench", "Time distances at several simplification sizes");
    bench->add_option("dir", dir)->required();
    bench->add_option("--sizes", sizes)->delimiter(',')->check(CLI::PositiveNumber);
    bench->add_option("--pairs", pairs)->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"mtmd"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    // Odd simplification targets are a usage problem, not a data problem.
    const bool odd_target = (*simplify && target % 2 != 0) || (*dist && simplify_to % 2 != 0) ||
                            (*matrix && simplify_to % 2 != 0) ||
                            (*bench && std::any_of(sizes.begin(), sizes.end(), [](int s) { return s % 2 != 0; }));
    if (odd_target) {
        err << "error: node counts must be even\n";
        return kUsage;
    }

    try {
        if (*extract) {
            return cmd_extract(in, out_path, kind, out);
        }
        if (*simplify) {
            return cmd_simplify(in, out_path, target, threshold, out);
        }
        if (*dist) {
            return cmd_dist(in, in2, simplify_to, with_bottleneck, jobs, out);
        }
        if (*diagram) {
            return cmd_diagram(in, out);
        }
        if (*matrix) {
            return cmd_matrix(dir, out_path, jobs, simplify_to, heatmap, err);
        }
        if (*synth) {
            return cmd_synth_stability(dir, count, seed, eps, out);
        }
        if (*bench) {
            return cmd_bench(dir, sizes, pairs, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

} // namespace mtmd::cli

#include "mtmd/merge_tree.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mtmd/persistence.hpp"

namespace mtmd {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n)
    {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }

    std::uint32_t find(std::uint32_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t into, std::uint32_t from) { parent_[find(from)] = find(into); }

private:
    std::vector<std::uint32_t> parent_;
};

std::string hex_value(double v)
{
    if (v == 0.0) {
        v = 0.0; // fold -0
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    return std::string(buf, ptr);
}

std::string shortest_value(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const auto start = line.find_first_not_of(" \t", pos);
        if (start == std::string_view::npos) {
            break;
        }
        auto end = line.find_first_of(" \t", start);
        if (end == std::string_view::npos) {
            end = line.size();
        }
        tokens.push_back(line.substr(start, end - start));
        pos = end;
    }
    return tokens;
}

template <typename T>
T parse_token(std::string_view token, std::size_t line_no)
{
    T value{};
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad token '" + std::string(token) + "'");
    }
    return value;
}

} // namespace

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::root:
        return "root";
    case NodeKind::saddle:
        return "saddle";
    case NodeKind::maximum:
        return "max";
    }
    return "?";
}

MergeTree MergeTree::from_parts(std::vector<TreeNode> nodes, const std::vector<std::pair<int, int>>& edges,
                                TreeOrientation orientation)
{
    MergeTree tree;
    tree.orientation_ = orientation;
    tree.nodes_ = std::move(nodes);

    std::unordered_map<int, int> index;
    for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
        auto& n = tree.nodes_[i];
        n.parent = -1;
        n.children.clear();
        if (!index.emplace(n.id, static_cast<int>(i)).second) {
            throw std::invalid_argument("duplicate node id " + std::to_string(n.id));
        }
    }
    for (const auto& [p, c] : edges) {
        const auto pi = index.find(p);
        const auto ci = index.find(c);
        if (pi == index.end() || ci == index.end()) {
            throw std::invalid_argument("edge references unknown node (" + std::to_string(p) + ", " +
                                        std::to_string(c) + ")");
        }
        auto& child = tree.nodes_[static_cast<std::size_t>(ci->second)];
        if (child.parent != -1) {
            throw std::invalid_argument("node " + std::to_string(c) + " has two parents");
        }
        child.parent = pi->second;
        tree.nodes_[static_cast<std::size_t>(pi->second)].children.push_back(ci->second);
    }
    for (auto& n : tree.nodes_) {
        std::sort(n.children.begin(), n.children.end());
    }
    tree.validate();
    return tree;
}

MergeTree MergeTree::from_parts_infer(std::vector<TreeNode> nodes, const std::vector<std::pair<int, int>>& edges)
{
    std::unordered_map<int, double> value;
    for (const auto& n : nodes) {
        value[n.id] = n.value;
    }
    for (const auto& n : nodes) {
        if (n.kind != NodeKind::root) {
            continue;
        }
        for (const auto& [p, c] : edges) {
            if (p == n.id && value.count(c) != 0 && value[c] < n.value) {
                return from_parts(std::move(nodes), edges, TreeOrientation::join);
            }
        }
    }
    return from_parts(std::move(nodes), edges, TreeOrientation::split);
}

void MergeTree::validate()
{
    const auto n = nodes_.size();
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("merge tree must have an even node count >= 2, got " + std::to_string(n));
    }
    int roots = 0;
    int root = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes_[i].parent == -1) {
            ++roots;
            root = static_cast<int>(i);
        }
    }
    if (roots != 1) {
        throw std::invalid_argument("merge tree must have exactly one root, found " + std::to_string(roots));
    }
    root_ = root;

    int leaves = 0;
    int saddles = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = nodes_[i];
        const auto id = std::to_string(node.id);
        if (static_cast<int>(i) == root) {
            if (node.kind != NodeKind::root || node.children.size() != 1) {
                throw std::invalid_argument("root " + id + " must have kind root and exactly one child");
            }
        } else if (node.children.empty()) {
            if (node.kind != NodeKind::maximum) {
                throw std::invalid_argument("leaf " + id + " must have kind max");
            }
            ++leaves;
        } else {
            if (node.kind != NodeKind::saddle || node.children.size() != 2) {
                throw std::invalid_argument("interior node " + id + " must be a saddle with two children");
            }
            ++saddles;
        }
        if (node.parent != -1) {
            const auto& parent = nodes_[static_cast<std::size_t>(node.parent)];
            const bool ok = orientation_ == TreeOrientation::split ? node.value >= parent.value
                                                                   : node.value <= parent.value;
            if (!ok) {
                throw std::invalid_argument("edge " + std::to_string(parent.id) + " -> " + id +
                                            " is not monotone");
            }
        }
    }
    if (leaves != saddles + 1) {
        throw std::invalid_argument("merge tree must satisfy #leaves = #saddles + 1");
    }

    // Reachability from the root rules out cycles among non-root nodes.
    std::vector<int> stack{root};
    std::size_t seen = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int c : nodes_[static_cast<std::size_t>(v)].children) {
            stack.push_back(c);
        }
    }
    if (seen != n) {
        throw std::invalid_argument("merge tree is not connected");
    }
}

int MergeTree::index_of(int id) const
{
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) {
            return static_cast<int>(i);
        }
    }
    throw std::out_of_range("no node with id " + std::to_string(id));
}

int MergeTree::leaf_count() const
{
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                          [](const TreeNode& n) { return n.kind == NodeKind::maximum; }));
}

int MergeTree::saddle_count() const
{
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                          [](const TreeNode& n) { return n.kind == NodeKind::saddle; }));
}

bool MergeTree::higher(int a, int b) const
{
    const auto& na = node(a);
    const auto& nb = node(b);
    const double va = orientation_ == TreeOrientation::split ? na.value : -na.value;
    const double vb = orientation_ == TreeOrientation::split ? nb.value : -nb.value;
    return va > vb || (va == vb && na.id > nb.id);
}

int MergeTree::global_max() const
{
    int best = -1;
    for (int i = 0; i < size(); ++i) {
        if (node(i).kind == NodeKind::maximum && (best == -1 || higher(i, best))) {
            best = i;
        }
    }
    return best;
}

std::vector<std::pair<int, int>> MergeTree::edges() const
{
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i) {
        if (node(i).parent != -1) {
            out.emplace_back(node(i).parent, i);
        }
    }
    return out;
}

bool MergeTree::is_ancestor(int ancestor, int n) const
{
    for (int v = n; v != -1; v = node(v).parent) {
        if (v == ancestor) {
            return true;
        }
    }
    return false;
}

MergeTree MergeTree::negated() const
{
    MergeTree out = *this;
    for (auto& n : out.nodes_) {
        n.value = -n.value;
    }
    out.orientation_ = orientation_ == TreeOrientation::split ? TreeOrientation::join : TreeOrientation::split;
    return out;
}

MergeTree MergeTree::as_split() const
{
    return orientation_ == TreeOrientation::split ? *this : negated();
}

MergeTree extract_split_tree(const SimplicialField& field)
{
    const auto order = field.sorted_vertices();
    const std::size_t nv = field.vertex_count();

    UnionFind uf(nv);
    std::vector<char> processed(nv, 0);
    std::vector<int> lowest_node(nv, -1);    // per component root: current lowest tree node
    std::vector<std::uint32_t> rep(nv, 0);   // per component root: vertex index of its first maximum

    std::vector<TreeNode> nodes;
    std::vector<std::pair<int, int>> edges;  // node ids
    int next_synthetic = static_cast<int>(nv);

    auto add_node = [&](int id, double value, NodeKind kind) {
        nodes.push_back(TreeNode{id, value, kind, -1, {}});
        return static_cast<int>(nodes.size() - 1);
    };

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint32_t v = *it;
        std::vector<std::uint32_t> comps;
        for (auto w : field.neighbors(v)) {
            if (processed[w]) {
                comps.push_back(uf.find(w));
            }
        }
        std::sort(comps.begin(), comps.end());
        comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
        std::sort(comps.begin(), comps.end(), [&](auto a, auto b) { return rep[a] < rep[b]; });
        processed[v] = 1;

        if (comps.empty()) {
            lowest_node[v] = add_node(static_cast<int>(v), field.value(v), NodeKind::maximum);
            rep[v] = v;
            continue;
        }
        if (comps.size() == 1) {
            const auto c = comps.front();
            uf.unite(c, v);
            continue;
        }

        // Unfold a k-fold saddle into k-1 binary saddles sharing its value;
        // the lowest keeps the vertex id.
        int current = lowest_node[comps[0]];
        for (std::size_t i = 1; i < comps.size(); ++i) {
            const bool last = i + 1 == comps.size();
            const int id = last ? static_cast<int>(v) : next_synthetic++;
            const int s = add_node(id, field.value(v), NodeKind::saddle);
            edges.emplace_back(id, nodes[static_cast<std::size_t>(current)].id);
            edges.emplace_back(id, nodes[static_cast<std::size_t>(lowest_node[comps[i]])].id);
            current = s;
        }
        const auto keep = comps[0];
        const auto keep_rep = rep[keep];
        for (std::size_t i = 1; i < comps.size(); ++i) {
            uf.unite(keep, comps[i]);
        }
        uf.unite(keep, v);
        const auto r = uf.find(v);
        lowest_node[r] = current;
        rep[r] = keep_rep;
    }

    const std::uint32_t global_min = order.front();
    const auto r = uf.find(global_min);
    int below = lowest_node[r];
    int root_id = static_cast<int>(global_min);
    if (nodes[static_cast<std::size_t>(below)].id == root_id) {
        // The minimum itself merged components; the root needs its own id.
        root_id = next_synthetic++;
    }
    add_node(root_id, field.value(global_min), NodeKind::root);
    edges.emplace_back(root_id, nodes[static_cast<std::size_t>(below)].id);
    return MergeTree::from_parts(std::move(nodes), edges, TreeOrientation::split);
}

MergeTree extract_join_tree(const SimplicialField& field)
{
    const auto& g = field.grid();
    std::vector<double> negated(g.values().begin(), g.values().end());
    for (auto& v : negated) {
        v = -v;
    }
    const SimplicialField flipped(ScalarGrid(g.width(), g.height(), std::move(negated)));
    return extract_split_tree(flipped).negated();
}

namespace {

MergeTree remove_leaf_branch(const MergeTree& tree, int leaf, int saddle)
{
    const auto& s = tree.node(saddle);
    const int other = s.children[0] == leaf ? s.children[1] : s.children[0];
    std::vector<TreeNode> nodes;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < tree.size(); ++i) {
        if (i != leaf && i != saddle) {
            nodes.push_back(tree.node(i));
        }
    }
    for (const auto& [p, c] : tree.edges()) {
        if (p == saddle || c == saddle || c == leaf) {
            continue;
        }
        edges.emplace_back(tree.node(p).id, tree.node(c).id);
    }
    edges.emplace_back(tree.node(s.parent).id, tree.node(other).id);
    return MergeTree::from_parts(std::move(nodes), edges, tree.orientation());
}

} // namespace

MergeTree simplify_persistence(const MergeTree& tree, double threshold)
{
    if (threshold < 0.0) {
        throw std::invalid_argument("simplify_persistence: threshold must be non-negative");
    }
    MergeTree current = tree;
    while (true) {
        const auto split = current.as_split();
        const auto dgm = elder_rule_diagram(split);
        const PersistencePair* pick = nullptr;
        for (const auto& p : dgm.pairs) {
            if (p.is_global || !(p.persistence() < threshold)) {
                continue;
            }
            const int ext = split.index_of(p.extremum_id);
            if (split.node(split.node(ext).parent).id != p.saddle_id) {
                continue;
            }
            if (pick == nullptr || p.persistence() < pick->persistence() ||
                (p.persistence() == pick->persistence() &&
                 (p.extremum_value < pick->extremum_value ||
                  (p.extremum_value == pick->extremum_value && p.extremum_id < pick->extremum_id)))) {
                pick = &p;
            }
        }
        if (pick == nullptr) {
            return current;
        }
        current = remove_leaf_branch(current, current.index_of(pick->extremum_id), current.index_of(pick->saddle_id));
    }
}

SimplifiedTree simplify_to_node_count(const MergeTree& tree, int target)
{
    if (target < 2 || target % 2 != 0) {
        throw std::invalid_argument("simplify_to_node_count: target must be even and >= 2");
    }
    if (tree.size() <= target) {
        return {tree, 0.0};
    }
    const auto dgm = elder_rule_diagram(tree.as_split());
    std::vector<double> pers;
    double global = 0.0;
    for (const auto& p : dgm.pairs) {
        if (p.is_global) {
            global = p.persistence();
        } else {
            pers.push_back(p.persistence());
        }
    }
    std::sort(pers.begin(), pers.end());
    pers.push_back(global);

    const auto needed = static_cast<std::size_t>((tree.size() - target) / 2);
    for (std::size_t j = needed; j < pers.size(); ++j) {
        if (!(pers[j - 1] < pers[j])) {
            continue;
        }
        const double threshold = 0.5 * (pers[j - 1] + pers[j]);
        auto simplified = simplify_persistence(tree, threshold);
        if (simplified.size() <= target) {
            return {std::move(simplified), threshold};
        }
    }
    throw std::logic_error("simplify_to_node_count: persistence ties prevent reaching the target size");
}

std::string canonical_form(const MergeTree& tree)
{
    auto rec = [&](auto&& self, int v) -> std::string {
        const auto& n = tree.node(v);
        std::vector<std::string> kids;
        for (int c : n.children) {
            kids.push_back(self(self, c));
        }
        std::sort(kids.begin(), kids.end());
        std::string out = "(" + hex_value(n.value);
        for (const auto& k : kids) {
            out += k;
        }
        out += ")";
        return out;
    };
    const char* tag = tree.orientation() == TreeOrientation::split ? "S" : "J";
    return tag + rec(rec, tree.root());
}

bool is_isomorphic(const MergeTree& a, const MergeTree& b)
{
    return a.size() == b.size() && canonical_form(a) == canonical_form(b);
}

MergeTree parse_tree(std::string_view text)
{
    const auto lines = split_lines(text);
    std::size_t li = 0;
    auto next_line = [&]() -> std::pair<std::vector<std::string_view>, std::size_t> {
        while (li < lines.size()) {
            auto tokens = split_ws(lines[li]);
            ++li;
            if (!tokens.empty()) {
                return {tokens, li};
            }
        }
        return {{}, li + 1};
    };

    auto [header, header_line] = next_line();
    if (header.size() != 2 || header[0] != "n") {
        throw std::invalid_argument("line " + std::to_string(header_line) + ": expected 'n <count>'");
    }
    const int count = parse_token<int>(header[1], header_line);
    if (count < 2) {
        throw std::invalid_argument("line " + std::to_string(header_line) + ": node count must be >= 2");
    }

    std::vector<TreeNode> nodes;
    for (int i = 0; i < count; ++i) {
        auto [tok, line_no] = next_line();
        if (tok.size() != 3) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected '<id> <value> <kind>'");
        }
        TreeNode n;
        n.id = parse_token<int>(tok[0], line_no);
        n.value = parse_token<double>(tok[1], line_no);
        if (tok[2] == "root") {
            n.kind = NodeKind::root;
        } else if (tok[2] == "saddle") {
            n.kind = NodeKind::saddle;
        } else if (tok[2] == "max") {
            n.kind = NodeKind::maximum;
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown kind '" +
                                        std::string(tok[2]) + "'");
        }
        nodes.push_back(std::move(n));
    }
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < count; ++i) {
        auto [tok, line_no] = next_line();
        if (tok.size() != 2) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected '<parent-id> <child-id>'");
        }
        edges.emplace_back(parse_token<int>(tok[0], line_no), parse_token<int>(tok[1], line_no));
    }
    if (auto [extra, line_no] = next_line(); !extra.empty()) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": unexpected trailing content");
    }
    return MergeTree::from_parts_infer(std::move(nodes), edges);
}

std::string serialize_tree(const MergeTree& tree)
{
    std::vector<int> order(static_cast<std::size_t>(tree.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return tree.node(a).id < tree.node(b).id; });

    std::string out = "n " + std::to_string(tree.size()) + "\n";
    for (int i : order) {
        const auto& n = tree.node(i);
        out += std::to_string(n.id) + " " + shortest_value(n.value) + " " + std::string(to_string(n.kind)) + "\n";
    }
    for (int i : order) {
        const auto& n = tree.node(i);
        if (n.parent != -1) {
            out += std::to_string(tree.node(n.parent).id) + " " + std::to_string(n.id) + "\n";
        }
    }
    return out;
}

MergeTree read_tree_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open tree file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_tree(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void write_tree_file(const std::string& path, const MergeTree& tree)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write tree file '" + path + "'");
    }
    out << serialize_tree(tree);
}

} // namespace mtmd

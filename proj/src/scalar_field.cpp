#include "mtmd/scalar_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mtmd {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line)
{
    token = trim(token);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("line " + std::to_string(line) + ": non-numeric token '" +
                                    std::string(token) + "'");
    }
    if (!std::isfinite(value)) {
        throw std::invalid_argument("line " + std::to_string(line) + ": non-finite value");
    }
    return value;
}

std::size_t parse_dimension(std::string_view token, std::size_t line)
{
    token = trim(token);
    std::size_t value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end || value == 0) {
        throw std::invalid_argument("line " + std::to_string(line) + ": bad dimension '" +
                                    std::string(token) + "'");
    }
    return value;
}

void append_shortest(std::string& out, double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

// Deterministic uniform draw in [lo, hi); avoids implementation-defined
// distribution algorithms so corpora are identical across toolchains.
double uniform(std::mt19937_64& rng, double lo, double hi)
{
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

} // namespace

ScalarGrid::ScalarGrid(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values))
{
    if (width == 0 || height == 0) {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    if (values_.size() != width * height) {
        throw std::invalid_argument("dimension mismatch: expected " + std::to_string(width * height) +
                                    " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("grid values must be finite");
        }
    }
}

SimplicialField::SimplicialField(ScalarGrid grid) : grid_(std::move(grid))
{
    const std::size_t w = grid_.width();
    const std::size_t h = grid_.height();
    if (w < 2 || h < 2) {
        throw std::invalid_argument("degenerate grid: triangulation needs at least 2x2 samples");
    }

    auto idx = [w](std::size_t r, std::size_t c) { return static_cast<std::uint32_t>(r * w + c); };
    triangles_.reserve(2 * (w - 1) * (h - 1));
    for (std::size_t r = 0; r + 1 < h; ++r) {
        for (std::size_t c = 0; c + 1 < w; ++c) {
            const auto a = idx(r, c);
            const auto b = idx(r, c + 1);
            const auto d = idx(r + 1, c);
            const auto e = idx(r + 1, c + 1);
            triangles_.push_back({a, b, e});
            triangles_.push_back({a, d, e});
        }
    }

    // Grid edges plus the (r,c)-(r+1,c+1) diagonals: six link neighbours inside.
    static constexpr std::array<std::array<int, 2>, 6> offsets{
        {{-1, -1}, {-1, 0}, {0, -1}, {0, 1}, {1, 0}, {1, 1}}};
    adjacency_offsets_.reserve(grid_.size() + 1);
    adjacency_offsets_.push_back(0);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            for (const auto& [dr, dc] : offsets) {
                const auto rr = static_cast<long>(r) + dr;
                const auto cc = static_cast<long>(c) + dc;
                if (rr >= 0 && cc >= 0 && rr < static_cast<long>(h) && cc < static_cast<long>(w)) {
                    adjacency_.push_back(idx(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)));
                }
            }
            adjacency_offsets_.push_back(static_cast<std::uint32_t>(adjacency_.size()));
        }
    }
}

std::span<const std::uint32_t> SimplicialField::neighbors(std::size_t v) const
{
    return std::span<const std::uint32_t>(adjacency_).subspan(
        adjacency_offsets_[v], adjacency_offsets_[v + 1] - adjacency_offsets_[v]);
}

std::vector<std::uint32_t> SimplicialField::sorted_vertices() const
{
    std::vector<std::uint32_t> order(vertex_count());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [this](auto a, auto b) { return lower(a, b); });
    return order;
}

ScalarGrid parse_grid(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        lines.push_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        pos = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw std::invalid_argument("empty grid file");
    }

    const auto header = trim(lines[0]);
    const auto sep = header.find_first_of(" \t");
    if (sep == std::string_view::npos) {
        throw std::invalid_argument("line 1: expected '<height> <width>'");
    }
    const std::size_t height = parse_dimension(header.substr(0, sep), 1);
    const std::size_t width = parse_dimension(header.substr(sep + 1), 1);

    if (lines.size() - 1 != height) {
        throw std::invalid_argument("dimension mismatch: header declares " + std::to_string(height) +
                                    " rows, found " + std::to_string(lines.size() - 1));
    }

    std::vector<double> values;
    values.reserve(width * height);
    for (std::size_t r = 0; r < height; ++r) {
        const std::size_t line_no = r + 2;
        std::string_view row = lines[r + 1];
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = row.find(',', start);
            values.push_back(parse_number(row.substr(start, comma == std::string_view::npos
                                                                ? std::string_view::npos
                                                                : comma - start),
                                          line_no));
            ++count;
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (count != width) {
            throw std::invalid_argument("dimension mismatch on line " + std::to_string(line_no) +
                                        ": expected " + std::to_string(width) + " values, got " +
                                        std::to_string(count));
        }
    }
    return ScalarGrid(width, height, std::move(values));
}

std::string serialize_grid(const ScalarGrid& grid)
{
    std::string out = std::to_string(grid.height()) + " " + std::to_string(grid.width()) + "\n";
    for (std::size_t r = 0; r < grid.height(); ++r) {
        for (std::size_t c = 0; c < grid.width(); ++c) {
            if (c != 0) {
                out.push_back(',');
            }
            append_shortest(out, grid.at(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

ScalarGrid read_grid_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open grid file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_grid(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void write_grid_file(const std::string& path, const ScalarGrid& grid)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write grid file '" + path + "'");
    }
    out << serialize_grid(grid);
}

SimplicialField triangulate(const ScalarGrid& grid)
{
    return SimplicialField(grid);
}

double linf_distance(const ScalarGrid& a, const ScalarGrid& b)
{
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("linf_distance: dimension mismatch");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        best = std::max(best, std::abs(a.values()[i] - b.values()[i]));
    }
    return best;
}

void validate_baseline(const BaselineParams& p)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("baseline: " + what); };

    if (!(p.eps > 0.0)) {
        fail("eps must be positive");
    }
    if (p.width < 7 || p.height < 3) {
        fail("grid must be at least 7 columns by 3 rows");
    }
    if (!(p.row_falloff > 0.0)) {
        fail("row falloff must be positive");
    }
    const std::array<std::size_t, 5> cols{p.peak_columns[0], p.saddle_columns[0], p.peak_columns[1],
                                          p.saddle_columns[1], p.peak_columns[2]};
    if (cols[0] == 0 || cols[4] + 1 >= p.width || !std::is_sorted(cols.begin(), cols.end()) ||
        std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
        fail("columns must satisfy 0 < peak A < saddle 1 < peak B < saddle 2 < peak C < width-1");
    }

    const double s_lo = std::min(p.saddle_values[0], p.saddle_values[1]);
    const double s_hi = std::max(p.saddle_values[0], p.saddle_values[1]);
    if (s_lo == s_hi) {
        fail("saddle values must differ");
    }
    if (!(s_hi - s_lo < 2.0 * p.eps)) {
        fail("saddles must differ by less than 2*eps (horizontal instability)");
    }
    if (!(p.boundary_value < s_lo)) {
        fail("boundary value must lie below both saddles");
    }

    auto peaks = p.peak_heights;
    std::sort(peaks.begin(), peaks.end());
    if (!(peaks[0] - s_hi > 2.0 * p.eps)) {
        fail("every maximum must exceed its connected saddle by more than 2*eps");
    }
    if (!(peaks[1] - peaks[0] > p.eps)) {
        fail("the two non-dominant maxima are within eps of each other");
    }
}

ScalarGrid synth_baseline(const BaselineParams& p)
{
    validate_baseline(p);

    const std::array<std::pair<double, double>, 7> knots{{
        {0.0, p.boundary_value},
        {static_cast<double>(p.peak_columns[0]), p.peak_heights[0]},
        {static_cast<double>(p.saddle_columns[0]), p.saddle_values[0]},
        {static_cast<double>(p.peak_columns[1]), p.peak_heights[1]},
        {static_cast<double>(p.saddle_columns[1]), p.saddle_values[1]},
        {static_cast<double>(p.peak_columns[2]), p.peak_heights[2]},
        {static_cast<double>(p.width - 1), p.boundary_value},
    }};

    std::vector<double> profile(p.width);
    std::size_t k = 0;
    for (std::size_t c = 0; c < p.width; ++c) {
        const double x = static_cast<double>(c);
        while (x > knots[k + 1].first) {
            ++k;
        }
        const auto [x0, y0] = knots[k];
        const auto [x1, y1] = knots[k + 1];
        // Knots sit on integer columns, so their values are reproduced exactly.
        profile[c] = (x == x0) ? y0 : (x == x1) ? y1 : y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }

    const auto mid = static_cast<long>(p.height / 2);
    std::vector<double> values;
    values.reserve(p.width * p.height);
    for (std::size_t r = 0; r < p.height; ++r) {
        const double drop = p.row_falloff * static_cast<double>(std::labs(static_cast<long>(r) - mid));
        for (std::size_t c = 0; c < p.width; ++c) {
            values.push_back(profile[c] - drop);
        }
    }
    return ScalarGrid(p.width, p.height, std::move(values));
}

ScalarGrid perturb_field(const ScalarGrid& grid, std::uint64_t seed, double amplitude)
{
    if (amplitude < 0.0 || !std::isfinite(amplitude)) {
        throw std::invalid_argument("perturb_field: amplitude must be finite and non-negative");
    }
    if (amplitude == 0.0) {
        return grid;
    }

    const std::size_t w = grid.width();
    const std::size_t h = grid.height();
    const double extent = static_cast<double>(std::max(w, h));
    std::mt19937_64 rng(seed);

    std::vector<double> added(grid.size());
    double peak = 0.0;
    while (!(peak > 0.0)) {
        const double a = uniform(rng, -1.0, 1.0);
        const double b = uniform(rng, -1.0, 1.0);
        const double c = uniform(rng, -1.0, 1.0);
        const double cx = uniform(rng, 0.0, static_cast<double>(w - 1));
        const double cy = uniform(rng, 0.0, static_cast<double>(h - 1));
        const double sigma = uniform(rng, 0.15, 0.5) * extent;

        peak = 0.0;
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t col = 0; col < w; ++col) {
                const double x = w > 1 ? 2.0 * static_cast<double>(col) / static_cast<double>(w - 1) - 1.0 : 0.0;
                const double y = h > 1 ? 2.0 * static_cast<double>(r) / static_cast<double>(h - 1) - 1.0 : 0.0;
                const double dx = static_cast<double>(col) - cx;
                const double dy = static_cast<double>(r) - cy;
                const double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                const double v = (a * x + b * y + c) * bump;
                added[r * w + col] = v;
                peak = std::max(peak, std::abs(v));
            }
        }
    }

    std::vector<double> values(grid.values().begin(), grid.values().end());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] += added[i] / peak * amplitude;
    }
    return ScalarGrid(w, h, std::move(values));
}

} // namespace mtmd

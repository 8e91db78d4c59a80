#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtmd {

/// Regular 2D sampled scalar field, row-major.
class ScalarGrid {
public:
    ScalarGrid() = default;
    ScalarGrid(std::size_t width, std::size_t height, std::vector<double> values);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return values_.size(); }

    double at(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const ScalarGrid&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> values_;
};

/// Piecewise-linear field on the Freudenthal triangulation of a grid.
///
/// Each cell (i,j)-(i+1,j+1) is split along the diagonal joining those two
/// corners. Vertices are strictly ordered by (value, linear index), which
/// simulates a simple Morse function without touching the stored values.
class SimplicialField {
public:
    explicit SimplicialField(ScalarGrid grid);

    std::size_t vertex_count() const { return grid_.size(); }
    double value(std::size_t v) const { return grid_.values()[v]; }
    const ScalarGrid& grid() const { return grid_; }

    /// Triangles as vertex-index triples; 2*(w-1)*(h-1) of them.
    const std::vector<std::array<std::uint32_t, 3>>& triangles() const { return triangles_; }

    /// Link neighbours of `v` (grid edges plus the chosen diagonals).
    std::span<const std::uint32_t> neighbors(std::size_t v) const;

    /// Strict total order: true iff vertex `a` is lower than vertex `b`.
    bool lower(std::size_t a, std::size_t b) const
    {
        const double va = value(a);
        const double vb = value(b);
        return va < vb || (va == vb && a < b);
    }

    /// Vertices sorted ascending in the strict order.
    std::vector<std::uint32_t> sorted_vertices() const;

private:
    ScalarGrid grid_;
    std::vector<std::array<std::uint32_t, 3>> triangles_;
    std::vector<std::uint32_t> adjacency_;
    std::vector<std::uint32_t> adjacency_offsets_;
};

/// Parses the grid text format: "<height> <width>" then `height` rows of
/// `width` comma-separated numbers.
ScalarGrid parse_grid(std::string_view text);

/// Emits the grid text format with shortest round-trip decimals.
std::string serialize_grid(const ScalarGrid& grid);

ScalarGrid read_grid_file(const std::string& path);
void write_grid_file(const std::string& path, const ScalarGrid& grid);

SimplicialField triangulate(const ScalarGrid& grid);

/// Max absolute sample difference; grids must share dimensions.
double linf_distance(const ScalarGrid& a, const ScalarGrid& b);

/// Parameters for the three-peak baseline used by the stability experiment.
///
/// The field is a 1D profile along the middle row (left boundary, peak A,
/// saddle 1, peak B, saddle 2, peak C, right boundary) falling off linearly
/// away from that row, so its split tree is: root -> saddle 1 -> {A, saddle 2},
/// saddle 2 -> {B, C}.
struct BaselineParams {
    std::size_t width = 41;
    std::size_t height = 11;
    std::array<double, 3> peak_heights{10.0, 5.0, 5.2};
    std::array<std::size_t, 3> peak_columns{6, 20, 34};
    std::array<double, 2> saddle_values{1.0, 1.05};
    std::array<std::size_t, 2> saddle_columns{13, 27};
    double boundary_value = 0.0;
    double row_falloff = 1.0;
    double eps = 0.1;
};

/// Throws std::invalid_argument naming the violated constraint.
void validate_baseline(const BaselineParams& params);

ScalarGrid synth_baseline(const BaselineParams& params = {});

/// Adds plane(a,b,c) * gaussian(center, width) drawn from `seed`, rescaled so
/// that the added field has L-infinity norm exactly `amplitude`.
ScalarGrid perturb_field(const ScalarGrid& grid, std::uint64_t seed, double amplitude);

} // namespace mtmd

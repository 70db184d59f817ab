#pragma once

// Radial geometry of the exterior of a ball B(r0) in R^n, truncated at r_max.
// For n = 1 the domain is the half-line (0, r_max].

#include "sdwave/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sdwave {

struct Grading {
    enum class Kind { Uniform, Geometric };

    Kind kind = Kind::Uniform;
    /// Ratio of the outermost to the innermost cell width (geometric only).
    double ratio = 1.0;

    static Grading uniform() { return {}; }
    static Grading geometric(double ratio) { return {Kind::Geometric, ratio}; }
};

/// Measure of the unit sphere S^{n-1}; 1 for the half-line.
inline double sphere_measure(int dim)
{
    if (dim == 1) return 1.0;
    const double half = 0.5 * dim;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

namespace detail {

// Mean of r^m over [a, b], written without cancellation.
inline double mean_power(double a, double b, int m)
{
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) sum += std::pow(a, j) * std::pow(b, m - j);
    return sum / (m + 1);
}

inline double binomial(int m, int j)
{
    double c = 1.0;
    for (int q = 1; q <= j; ++q) c = c * (m - q + 1) / q;
    return c;
}

// Integrals of the two hat halves against r^m over the cell [a, a + h]:
// first = int (r - a)/h r^m dr, second = int (a + h - r)/h r^m dr.
inline std::pair<double, double> hat_moments(double a, double h, int m)
{
    double rising = 0.0;
    double falling = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double term = binomial(m, j) * std::pow(a, m - j) * std::pow(h, j);
        rising += term / (j + 2);
        falling += term * (1.0 / (j + 1) - 1.0 / (j + 2));
    }
    return {h * rising, h * falling};
}

// Derivative weights of the quadratic through (x0, x1, x2) evaluated at x.
inline std::array<double, 3> quadratic_first(double x0, double x1, double x2, double x)
{
    const double d0 = (x0 - x1) * (x0 - x2);
    const double d1 = (x1 - x0) * (x1 - x2);
    const double d2 = (x2 - x0) * (x2 - x1);
    return {((x - x1) + (x - x2)) / d0, ((x - x0) + (x - x2)) / d1, ((x - x0) + (x - x1)) / d2};
}

inline std::array<double, 3> quadratic_second(double x0, double x1, double x2)
{
    return {2.0 / ((x0 - x1) * (x0 - x2)), 2.0 / ((x1 - x0) * (x1 - x2)),
            2.0 / ((x2 - x0) * (x2 - x1))};
}

} // namespace detail

class RadialGrid {
    struct Data {
        int dim = 1;
        double r_obstacle = 0.0;
        double r_max = 1.0;
        std::vector<double> nodes;
        std::vector<double> weights;
        // omega * mean(r^{n-1}) / h per cell; the stiffness matrix couples
        // neighbours through these.
        std::vector<double> flux;
    };

public:
    RadialGrid(int dim, double r_obstacle, std::vector<double> nodes)
    {
        require(dim >= 1, ErrorKind::InvalidDimension, "dim must be >= 1");
        require(nodes.size() >= 3, ErrorKind::TooFewCells, "need at least 3 nodes");
        require(nodes.front() == r_obstacle, ErrorKind::InvalidArgument,
                "first node must sit on the obstacle");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            require(nodes[i] > nodes[i - 1], ErrorKind::InvalidArgument,
                    "nodes must be strictly increasing");

        auto data = std::make_shared<Data>();
        data->dim = dim;
        data->r_obstacle = r_obstacle;
        data->r_max = nodes.back();
        data->nodes = std::move(nodes);

        const auto& r = data->nodes;
        const std::size_t m = r.size();
        const double omega = sphere_measure(dim);
        data->weights.assign(m, 0.0);
        data->flux.assign(m - 1, 0.0);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double h = r[i + 1] - r[i];
            const auto [rising, falling] = detail::hat_moments(r[i], h, dim - 1);
            data->weights[i] += omega * falling;
            data->weights[i + 1] += omega * rising;
            data->flux[i] = omega * detail::mean_power(r[i], r[i + 1], dim - 1) / h;
        }
        data_ = std::move(data);
    }

    int dim() const noexcept { return data_->dim; }
    double r_obstacle() const noexcept { return data_->r_obstacle; }
    double r_max() const noexcept { return data_->r_max; }
    std::size_t size() const noexcept { return data_->nodes.size(); }
    std::size_t cells() const noexcept { return size() - 1; }

    std::span<const double> nodes() const noexcept { return data_->nodes; }
    std::span<const double> quad_weights() const noexcept { return data_->weights; }
    std::span<const double> flux_coefficients() const noexcept { return data_->flux; }

    double node(std::size_t i) const { return data_->nodes[i]; }
    double spacing(std::size_t cell) const { return data_->nodes[cell + 1] - data_->nodes[cell]; }
    double max_spacing() const
    {
        double h = 0.0;
        for (std::size_t i = 0; i + 1 < size(); ++i) h = std::max(h, spacing(i));
        return h;
    }

    /// Interior nodes carry second-order operators; the two end nodes do not.
    bool is_interior(std::size_t i) const noexcept { return i > 0 && i + 1 < size(); }

    /// Exact measure of {r_obstacle <= |x| <= r_max}.
    double annulus_volume() const
    {
        const int n = dim();
        return sphere_measure(n) * (std::pow(r_max(), n) - std::pow(r_obstacle(), n)) / n;
    }

    bool same_as(const RadialGrid& other) const noexcept
    {
        if (data_ == other.data_) return true;
        return dim() == other.dim() && data_->nodes == other.data_->nodes;
    }

private:
    std::shared_ptr<const Data> data_;
};

/// Builds the radial grid; geometric grading clusters nodes at the obstacle.
inline RadialGrid build_radial_grid(int dim, double r_obstacle, double r_max, int cells,
                                    Grading grading = Grading::uniform())
{
    require(dim >= 1, ErrorKind::InvalidDimension, "dim must be >= 1, got " + std::to_string(dim));
    require(std::isfinite(r_obstacle) && std::isfinite(r_max) && r_max > r_obstacle,
            ErrorKind::DegenerateInterval, "r_max must exceed r_obstacle");
    require(cells >= 8, ErrorKind::TooFewCells, "cells must be >= 8, got " + std::to_string(cells));
    if (dim == 1) {
        require(r_obstacle == 0.0, ErrorKind::InvalidArgument,
                "the half-line (dim = 1) starts at r = 0");
    } else {
        require(r_obstacle > 0.0, ErrorKind::InvalidArgument,
                "an obstacle radius > 0 is required for dim >= 2");
    }

    const double length = r_max - r_obstacle;
    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    if (grading.kind == Grading::Kind::Uniform || grading.ratio == 1.0) {
        const double h = length / cells;
        for (int i = 0; i <= cells; ++i) nodes[i] = r_obstacle + i * h;
    } else {
        require(std::isfinite(grading.ratio) && grading.ratio > 1.0, ErrorKind::InvalidGrading,
                "geometric grading ratio must be > 1");
        const double growth = std::pow(grading.ratio, 1.0 / (cells - 1));
        const double first = length * (growth - 1.0) / (std::pow(growth, cells) - 1.0);
        for (int i = 0; i <= cells; ++i)
            nodes[i] = r_obstacle + first * (std::pow(growth, i) - 1.0) / (growth - 1.0);
    }
    nodes.front() = r_obstacle;
    nodes.back() = r_max;
    return RadialGrid(dim, r_obstacle, std::move(nodes));
}

/// A radially symmetric function sampled at the grid nodes.
class RadialField {
public:
    explicit RadialField(RadialGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

    RadialField(RadialGrid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values))
    {
        require(values_.size() == grid_.size(), ErrorKind::FieldMismatch,
                "field length " + std::to_string(values_.size()) + " != node count " +
                    std::to_string(grid_.size()));
    }

    template <class Fn>
    static RadialField sample(const RadialGrid& grid, Fn&& fn)
    {
        RadialField field(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) field.values_[i] = fn(grid.node(i));
        return field;
    }

    const RadialGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

private:
    RadialGrid grid_;
    std::vector<double> values_;
};

inline void require_on_grid(const RadialGrid& grid, const RadialField& f)
{
    require(f.grid().same_as(grid), ErrorKind::FieldMismatch, "field does not live on this grid");
}

/// (K f)_i for the weighted stiffness matrix K of the conservative radial
/// Laplacian; valid for interior rows.
inline double stiffness_row(const RadialGrid& grid, std::span<const double> f, std::size_t i)
{
    const auto flux = grid.flux_coefficients();
    return flux[i - 1] * (f[i] - f[i - 1]) + flux[i] * (f[i] - f[i + 1]);
}

/// Conservative second-order radial Laplacian f'' + (n-1)/r f'. The two end
/// nodes use one-sided quadratic stencils and are only first order.
inline RadialField radial_laplacian(const RadialGrid& grid, const RadialField& f)
{
    require_on_grid(grid, f);
    const auto r = grid.nodes();
    const auto w = grid.quad_weights();
    const auto v = f.values();
    const std::size_t m = grid.size();
    const int n = grid.dim();

    RadialField out(grid);
    for (std::size_t i = 1; i + 1 < m; ++i) out[i] = -stiffness_row(grid, v, i) / w[i];

    auto one_sided = [&](std::size_t at, std::size_t a, std::size_t b, std::size_t c) {
        const auto d2 = detail::quadratic_second(r[a], r[b], r[c]);
        double value = d2[0] * v[a] + d2[1] * v[b] + d2[2] * v[c];
        if (n > 1) {
            const auto d1 = detail::quadratic_first(r[a], r[b], r[c], r[at]);
            value += (n - 1) / r[at] * (d1[0] * v[a] + d1[1] * v[b] + d1[2] * v[c]);
        }
        return value;
    };
    out[0] = one_sided(0, 0, 1, 2);
    out[m - 1] = one_sided(m - 1, m - 3, m - 2, m - 1);
    return out;
}

/// Radial derivative f'(r) from local quadratics (second order everywhere on
/// smooth grids, one-sided at the ends).
inline RadialField radial_gradient(const RadialGrid& grid, const RadialField& f)
{
    require_on_grid(grid, f);
    const auto r = grid.nodes();
    const auto v = f.values();
    const std::size_t m = grid.size();
    RadialField out(grid);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t a = i == 0 ? 0 : (i + 1 == m ? m - 3 : i - 1);
        const auto d1 = detail::quadratic_first(r[a], r[a + 1], r[a + 2], r[i]);
        out[i] = d1[0] * v[a] + d1[1] * v[a + 1] + d1[2] * v[a + 2];
    }
    return out;
}

/// int_Omega f dx via the product trapezoidal rule against omega r^{n-1} dr.
inline double integrate(const RadialGrid& grid, std::span<const double> f)
{
    require(f.size() == grid.size(), ErrorKind::FieldMismatch, "sample count != node count");
    const auto w = grid.quad_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
    return sum;
}

inline double integrate(const RadialGrid& grid, const RadialField& f)
{
    require_on_grid(grid, f);
    return integrate(grid, f.values());
}

} // namespace sdwave

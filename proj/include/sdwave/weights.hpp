#pragma once

// Harmonic weights phi0 on the exterior of a ball: positive, harmonic,
// vanishing on the obstacle.
//
//   n = 1 : phi0(x) = C x
//   n = 2 : phi0(r) = ln(r / r0)
//   n >= 3: phi0(r) = 1 - (r0 / r)^{n-2}

#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace sdwave {

enum class WeightForm { Linear, Log, PowerGap };

inline const char* to_string(WeightForm form)
{
    switch (form) {
    case WeightForm::Linear: return "Linear";
    case WeightForm::Log: return "Log";
    case WeightForm::PowerGap: return "PowerGap";
    }
    return "?";
}

struct HarmonicWeight {
    int dim = 1;
    double r0 = 0.0;
    WeightForm form = WeightForm::Linear;
    double scale = 1.0;
};

inline HarmonicWeight make_weight(int dim, double r0, double scale = 1.0)
{
    require(dim >= 1, ErrorKind::InvalidDimension, "dim must be >= 1");
    if (dim == 1) {
        require(r0 == 0.0, ErrorKind::InvalidArgument, "dim = 1 needs r0 = 0");
        require(std::isfinite(scale) && scale > 0.0, ErrorKind::InvalidArgument,
                "the linear weight needs scale > 0");
        return {1, 0.0, WeightForm::Linear, scale};
    }
    require(std::isfinite(r0) && r0 > 0.0, ErrorKind::InvalidArgument, "dim >= 2 needs r0 > 0");
    // Only the linear weight has a free constant; the others are normalised.
    require(scale == 1.0, ErrorKind::InvalidArgument, "scale is only adjustable for dim = 1");
    return {dim, r0, dim == 2 ? WeightForm::Log : WeightForm::PowerGap, 1.0};
}

namespace detail {

inline void check_radius(const HarmonicWeight& w, double r)
{
    require(std::isfinite(r) && r >= w.r0, ErrorKind::OutOfDomain,
            "radius " + std::to_string(r) + " lies inside the obstacle (r0 = " +
                std::to_string(w.r0) + ")");
}

} // namespace detail

inline double eval_weight(const HarmonicWeight& w, double r)
{
    detail::check_radius(w, r);
    switch (w.form) {
    case WeightForm::Linear: return w.scale * r;
    case WeightForm::Log: return std::log(r / w.r0);
    case WeightForm::PowerGap: return 1.0 - std::pow(w.r0 / r, w.dim - 2);
    }
    return 0.0;
}

/// Radial derivative, which is also |grad phi0| by symmetry.
inline double eval_weight_gradient(const HarmonicWeight& w, double r)
{
    detail::check_radius(w, r);
    switch (w.form) {
    case WeightForm::Linear: return w.scale;
    case WeightForm::Log: return 1.0 / r;
    case WeightForm::PowerGap: return (w.dim - 2) * std::pow(w.r0, w.dim - 2) / std::pow(r, w.dim - 1);
    }
    return 0.0;
}

inline double eval_weight_second_derivative(const HarmonicWeight& w, double r)
{
    detail::check_radius(w, r);
    switch (w.form) {
    case WeightForm::Linear: return 0.0;
    case WeightForm::Log: return -1.0 / (r * r);
    case WeightForm::PowerGap:
        return -(w.dim - 1.0) * (w.dim - 2) * std::pow(w.r0, w.dim - 2) / std::pow(r, w.dim);
    }
    return 0.0;
}

/// Analytic Laplacian of phi0; zero up to round-off.
inline double eval_weight_laplacian(const HarmonicWeight& w, double r)
{
    const double second = eval_weight_second_derivative(w, r);
    if (w.dim == 1) return second;
    return second + (w.dim - 1) / r * eval_weight_gradient(w, r);
}

/// r^{n-1} |phi0'(r)|, which is constant in r for every form.
inline double gradient_flux_constant(const HarmonicWeight& w)
{
    switch (w.form) {
    case WeightForm::Linear: return w.scale;
    case WeightForm::Log: return 1.0;
    case WeightForm::PowerGap: return (w.dim - 2) * std::pow(w.r0, w.dim - 2);
    }
    return 0.0;
}

inline RadialField sample_weight(const HarmonicWeight& w, const RadialGrid& grid)
{
    return RadialField::sample(grid, [&](double r) { return eval_weight(w, r); });
}

struct WeightReport {
    int dim = 0;
    WeightForm form = WeightForm::Linear;
    std::size_t cells = 0;
    double max_laplacian_residual = 0.0;
    double boundary_value = 0.0;
    std::size_t bound_violations = 0;
    /// Smallest C with |grad phi0(r)| <= C / r^{n-1} on the grid nodes.
    double gradient_decay_constant = 0.0;
    /// (max - min) / max of r^{n-1} |grad phi0| over the nodes.
    double gradient_constancy_spread = 0.0;
    /// min phi0 over the outer half of the grid (the "phi0 >= C far out" constant).
    double far_field_lower_bound = 0.0;
    /// max phi0 / ln r over nodes with r >= e (Log form only, else NaN).
    double log_growth_constant = std::numeric_limits<double>::quiet_NaN();
};

inline WeightReport verify_weight(const HarmonicWeight& w, const RadialGrid& grid)
{
    require(grid.dim() == w.dim, ErrorKind::DimensionMismatch,
            "grid dim " + std::to_string(grid.dim()) + " != weight dim " + std::to_string(w.dim));
    require(grid.r_obstacle() == w.r0, ErrorKind::DimensionMismatch,
            "grid obstacle radius differs from the weight's r0");

    const auto r = grid.nodes();
    const RadialField phi = sample_weight(w, grid);
    const RadialField lap = radial_laplacian(grid, phi);

    WeightReport report;
    report.dim = w.dim;
    report.form = w.form;
    report.cells = grid.cells();
    report.boundary_value = phi[0];

    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        report.max_laplacian_residual = std::max(report.max_laplacian_residual, std::abs(lap[i]));

    for (std::size_t i = 1; i < grid.size(); ++i) {
        bool ok = phi[i] > 0.0 && phi[i] > phi[i - 1];
        if (w.form == WeightForm::PowerGap) ok = ok && phi[i] < 1.0;
        if (!ok) ++report.bound_violations;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (r[i] <= 0.0) continue;
        const double c = std::abs(eval_weight_gradient(w, r[i])) * std::pow(r[i], w.dim - 1);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    report.gradient_decay_constant = hi;
    report.gradient_constancy_spread = hi > 0.0 ? (hi - lo) / hi : 0.0;

    const double mid = 0.5 * (grid.r_obstacle() + grid.r_max());
    report.far_field_lower_bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (r[i] >= mid) report.far_field_lower_bound = std::min(report.far_field_lower_bound, phi[i]);

    if (w.form == WeightForm::Log) {
        double c = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (r[i] < std::numbers::e) continue;
            c = std::max(c, phi[i] / std::log(r[i]));
            any = true;
        }
        if (any) report.log_growth_constant = c;
    }
    return report;
}

} // namespace sdwave

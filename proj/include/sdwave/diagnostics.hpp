#pragma once

// Blow-up diagnostics: the data sign functional, the weak identity
// balance along a stored trajectory, the two sides of the Young-inequality
// bound, scaling fits in T, and the critical-case tail integrals.

#include "sdwave/cutoffs.hpp"
#include "sdwave/data.hpp"
#include "sdwave/detail/numerics.hpp"
#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"
#include "sdwave/solver.hpp"
#include "sdwave/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdwave {

struct SignFunctionalResult {
    double value = 0.0;
    bool positive = false;
};

namespace detail {

inline void check_weight_grid(const HarmonicWeight& w, const RadialGrid& grid)
{
    require(grid.dim() == w.dim && grid.r_obstacle() == w.r0, ErrorKind::DimensionMismatch,
            "weight and grid describe different domains");
}

} // namespace detail

/// int_Omega (u1 - Lap u0) phi0 dx with the discrete Laplacian.
inline SignFunctionalResult sign_functional(const InitialData& data, const HarmonicWeight& w, const RadialGrid& grid)
{
    detail::check_weight_grid(w, grid);
    require_on_grid(grid, data.u0);
    require_on_grid(grid, data.u1);
    const RadialField lap = radial_laplacian(grid, data.u0);
    std::vector<double> integrand(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        integrand[i] = (data.u1[i] - lap[i]) * eval_weight(w, grid.node(i));
    const double value = integrate(grid, integrand);
    return {value, value > 0.0};
}

/// The same functional after integrating by parts:
/// int u1 phi0 dx + int grad u0 . grad phi0 dx. The gradient of u0 is taken
/// from `grad_u0` when given (analytic data) and differenced otherwise.
inline SignFunctionalResult sign_functional_by_parts(const InitialData& data, const HarmonicWeight& w,
                                                     const RadialGrid& grid,
                                                     const std::optional<RadialField>& grad_u0 = std::nullopt)
{
    detail::check_weight_grid(w, grid);
    require_on_grid(grid, data.u0);
    require_on_grid(grid, data.u1);
    const RadialField du0 = grad_u0 ? *grad_u0 : radial_gradient(grid, data.u0);
    require_on_grid(grid, du0);
    std::vector<double> integrand(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.node(i);
        integrand[i] = data.u1[i] * eval_weight(w, r) + du0[i] * eval_weight_gradient(w, r);
    }
    const double value = integrate(grid, integrand);
    return {value, value > 0.0};
}

namespace detail {

// Trapezoid of the piecewise-linear interpolant of (times, values) over [a, b].
inline double integrate_series(std::span<const double> times, std::span<const double> values, double a, double b)
{
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
        const double t0 = times[j], t1 = times[j + 1];
        const double lo = std::max(a, t0), hi = std::min(b, t1);
        if (!(hi > lo)) continue;
        auto at = [&](double t) { return values[j] + (values[j + 1] - values[j]) * (t - t0) / (t1 - t0); };
        total += 0.5 * (hi - lo) * (at(lo) + at(hi));
    }
    return total;
}

inline void check_window(const Trajectory& traj, double T)
{
    require(!traj.times.empty(), ErrorKind::HorizonExceeded, "empty trajectory");
    require(T <= traj.horizon() * (1.0 + 1e-12), ErrorKind::HorizonExceeded,
            "window T = " + std::to_string(T) + " exceeds the trajectory horizon " + std::to_string(traj.horizon()));
    require(!traj.blowup_time || *traj.blowup_time > T, ErrorKind::BlowUpInsideWindow,
            "the solution blew up inside the window [0, T]");
}

struct SpatialSamples {
    std::vector<double> psi;
    std::vector<double> lap_psi;
};

inline SpatialSamples sample_spatial(const TestFunctionFamily& f, const RadialGrid& grid)
{
    SpatialSamples s{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SpatialFactor sf = spatial_factor(f, grid.node(i));
        s.psi[i] = sf.value;
        s.lap_psi[i] = sf.laplacian;
    }
    return s;
}

} // namespace detail

/// Both sides of the weak identity tested against phi = phi0 phi_T^l eta_T^k.
struct WeakIdentityTerms {
    double nonlinear = 0.0;        // int_0^T int N(u) phi (+ forcing)
    double data = 0.0;             // int (u1 - Lap u0) phi(0)
    double initial_velocity = 0.0; // int u0 phi_t(0); zero for this eta
    double rhs_dtt = 0.0;          // int int u phi_tt
    double rhs_lap_dt = 0.0;       // int int u Lap phi_t
    double rhs_lap = 0.0;          // int int u Lap phi
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;         // |lhs - rhs|
};

inline WeakIdentityTerms weak_form_terms(const Trajectory& traj, const TestFunctionFamily& f, const Nonlinearity& nl,
                                         const SourceTerm& forcing = {})
{
    const RadialGrid& grid = traj.grid;
    const double T = f.T();
    detail::check_window(traj, T);
    detail::check_family_grid(f, grid);
    require_on_grid(grid, traj.u0);
    require_on_grid(grid, traj.u1);

    const auto s = detail::sample_spatial(f, grid);
    const auto w = grid.quad_weights();
    const std::size_t nt = traj.times.size();
    std::vector<double> a(nt), b(nt), c(nt), d(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        const double t = traj.times[j];
        const Jet eta = f.temporal.power(t);
        const auto& u = traj.u[j];
        double sa = 0.0, su_psi = 0.0, su_lap = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double src = nl(u[i]);
            if (forcing) src += forcing(grid.node(i), t);
            sa += w[i] * src * s.psi[i];
            su_psi += w[i] * u[i] * s.psi[i];
            su_lap += w[i] * u[i] * s.lap_psi[i];
        }
        a[j] = sa * eta.value;
        b[j] = su_psi * eta.d2;
        c[j] = su_lap * eta.d1;
        d[j] = su_lap * eta.value;
    }

    WeakIdentityTerms out;
    out.nonlinear = detail::integrate_series(traj.times, a, 0.0, T);
    out.rhs_dtt = detail::integrate_series(traj.times, b, 0.0, T);
    out.rhs_lap_dt = detail::integrate_series(traj.times, c, 0.0, T);
    out.rhs_lap = detail::integrate_series(traj.times, d, 0.0, T);

    const RadialField lap_u0 = radial_laplacian(grid, traj.u0);
    const Jet eta0 = f.temporal.power(0.0);
    std::vector<double> data(grid.size()), vel(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        data[i] = (traj.u1[i] - lap_u0[i]) * s.psi[i] * eta0.value;
        vel[i] = traj.u0[i] * s.psi[i] * eta0.d1;
    }
    out.data = integrate(grid, data);
    out.initial_velocity = integrate(grid, vel);
    out.lhs = out.nonlinear + out.data - out.initial_velocity;
    out.rhs = out.rhs_dtt + out.rhs_lap_dt - out.rhs_lap;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

/// |LHS - RHS| of the weak identity over [0, T].
inline double weak_form_residual(const Trajectory& traj, const TestFunctionFamily& f, const Nonlinearity& nl,
                                 const SourceTerm& forcing = {})
{
    return weak_form_terms(traj, f, nl, forcing).residual;
}

struct InequalitySides {
    double T = 0.0;
    /// int_{Omega_1} (u1 - Lap u0) phi0 phi_T^l dx.
    double lhs = 0.0;
    /// Sum of the eight cut-off integrals (the bound up to its constant).
    double rhs = 0.0;
    /// lhs / rhs: the constant the bound would need at this T.
    double ratio = 0.0;
    /// False when the window reaches past the trajectory (or its blow-up).
    bool feasible = true;
};

inline InequalitySides inequality_sides(const InitialData& data, const TestFunctionFamily& f, double p,
                                        const RadialGrid& grid, const QuadratureOptions& quad = {})
{
    require_on_grid(grid, data.u0);
    require_on_grid(grid, data.u1);
    const NamedIntegrals rhs = rhs_scaling_integrals(f, p, grid, quad);
    const auto s = detail::sample_spatial(f, grid);
    const RadialField lap_u0 = radial_laplacian(grid, data.u0);
    std::vector<double> integrand(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) integrand[i] = (data.u1[i] - lap_u0[i]) * s.psi[i];

    InequalitySides out;
    out.T = f.T();
    out.lhs = integrate(grid, integrand);
    out.rhs = sum_of(rhs);
    out.ratio = out.lhs / out.rhs;
    return out;
}

inline InequalitySides inequality_sides(const Trajectory& traj, const TestFunctionFamily& f, double p,
                                        const QuadratureOptions& quad = {})
{
    InequalitySides out = inequality_sides(InitialData{traj.u0, traj.u1, {}}, f, p, traj.grid, quad);
    out.feasible = f.T() <= traj.horizon() * (1.0 + 1e-12) && (!traj.blowup_time || *traj.blowup_time > f.T());
    return out;
}

/// Predicted T-exponent of the cut-off bound: -2p' + 1 + n for n >= 3 and
/// -2p' + 3 for n = 1, 2 (n = 2 carries an extra ln T factor).
inline double predicted_scaling_slope(int dim, double p)
{
    const double q = holder_conjugate(p);
    return dim >= 3 ? -2.0 * q + 1.0 + dim : -2.0 * q + 3.0;
}

struct ScalingReport {
    int dim = 0;
    double p = 0.0;
    std::vector<double> T_values;
    std::vector<double> measured;
    double fitted_slope = 0.0;
    double predicted_slope = 0.0;
    double residual = 0.0;
    /// n = 2: the fit is of measured / ln T.
    bool log_corrected = false;
    /// max/min of measured / (ln^{[n=2]} T * T^{predicted}) over the ladder.
    double ratio_spread = 0.0;
};

inline ScalingReport fit_scaling(std::span<const double> T_values, std::span<const double> measured, int dim, double p)
{
    require(T_values.size() == measured.size(), ErrorKind::InvalidArgument, "T and measurement counts differ");
    require(T_values.size() >= 3, ErrorKind::InsufficientPoints, "scaling fit needs >= 3 values of T");
    require(p > 1.0, ErrorKind::InvalidArgument, "p must exceed 1");

    ScalingReport rep;
    rep.dim = dim;
    rep.p = p;
    rep.T_values.assign(T_values.begin(), T_values.end());
    rep.measured.assign(measured.begin(), measured.end());
    rep.predicted_slope = predicted_scaling_slope(dim, p);
    rep.log_corrected = dim == 2;

    std::vector<double> y(measured.begin(), measured.end());
    if (rep.log_corrected)
        for (std::size_t i = 0; i < y.size(); ++i) {
            require(T_values[i] > 1.0, ErrorKind::InvalidArgument, "log-corrected fit needs T > 1");
            y[i] /= std::log(T_values[i]);
        }
    const detail::LineFit fit = detail::fit_loglog(T_values, y);
    rep.fitted_slope = fit.slope;
    rep.residual = fit.residual;

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double ratio = y[i] / std::pow(T_values[i], rep.predicted_slope);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    rep.ratio_spread = hi / lo;
    return rep;
}

enum class TailTrend { Vanishing, Bounded, Growing };

inline const char* to_string(TailTrend t)
{
    switch (t) {
    case TailTrend::Vanishing: return "vanishing";
    case TailTrend::Bounded: return "bounded";
    case TailTrend::Growing: return "growing";
    }
    return "?";
}

struct TailRow {
    double T = 0.0;
    double late_inner = 0.0;   // int_{T/2}^T int_{Omega_1} |u|^p phi
    double late_annulus = 0.0; // int_{T/2}^T int_{T<=|x|<=2T} |u|^p phi
    double full_annulus = 0.0; // int_0^T int_{T<=|x|<=2T} |u|^p phi
};

struct CriticalCaseReport {
    std::vector<TailRow> rows;
    TailTrend trend = TailTrend::Vanishing;
};

inline TailTrend classify_trend(std::span<const double> series)
{
    if (std::all_of(series.begin(), series.end(), [](double x) { return x == 0.0; })) return TailTrend::Vanishing;
    const double first = series.front(), last = series.back();
    bool nonincreasing = true, nondecreasing = true;
    for (std::size_t j = 1; j < series.size(); ++j) {
        if (series[j] > series[j - 1] * (1.0 + 1e-12)) nonincreasing = false;
        if (series[j] < series[j - 1] * (1.0 - 1e-12)) nondecreasing = false;
    }
    if (nonincreasing && last < first) return TailTrend::Vanishing;
    if (nondecreasing && last > 1.1 * first) return TailTrend::Growing;
    return TailTrend::Bounded;
}

/// The three tail integrals of |u|^p phi per T, and the worst trend among them.
inline CriticalCaseReport critical_tail_report(const Trajectory& traj, const HarmonicWeight& weight, int ell, int k,
                                               double p, std::span<const double> T_ladder)
{
    require(!T_ladder.empty(), ErrorKind::InsufficientPoints, "empty T ladder");
    const RadialGrid& grid = traj.grid;
    const auto w = grid.quad_weights();
    CriticalCaseReport rep;
    for (double T : T_ladder) {
        const TestFunctionFamily f = make_test_family(weight, T, ell, k);
        detail::check_window(traj, T);
        detail::check_family_grid(f, grid);
        const auto s = detail::sample_spatial(f, grid);

        const std::size_t nt = traj.times.size();
        std::vector<double> inner(nt), annulus(nt);
        for (std::size_t j = 0; j < nt; ++j) {
            const double eta = f.temporal.power(traj.times[j]).value;
            double si = 0.0, sa = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double r = grid.node(i);
                const double term = w[i] * std::pow(std::abs(traj.u[j][i]), p) * s.psi[i];
                if (r <= 2.0 * T) si += term;
                if (r >= T && r <= 2.0 * T) sa += term;
            }
            inner[j] = si * eta;
            annulus[j] = sa * eta;
        }
        rep.rows.push_back({T, detail::integrate_series(traj.times, inner, 0.5 * T, T),
                            detail::integrate_series(traj.times, annulus, 0.5 * T, T),
                            detail::integrate_series(traj.times, annulus, 0.0, T)});
    }

    auto worst = TailTrend::Vanishing;
    auto take = [&](auto member) {
        std::vector<double> series;
        for (const auto& row : rep.rows) series.push_back(row.*member);
        const TailTrend t = classify_trend(series);
        if (static_cast<int>(t) > static_cast<int>(worst)) worst = t;
    };
    take(&TailRow::late_inner);
    take(&TailRow::late_annulus);
    take(&TailRow::full_annulus);
    rep.trend = worst;
    return rep;
}

} // namespace sdwave

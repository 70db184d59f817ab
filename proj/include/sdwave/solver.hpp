#pragma once

// Time integration of u_tt - Lap u - Lap u_t = |u|^p on the radial grid with
// homogeneous Dirichlet data at the obstacle and at the truncation radius.
//
// The scheme is Crank-Nicolson for the linear part and an explicit
// half-step evaluation of the nonlinearity:
//
//   u+ - u = dt/2 (v+ + v)
//   M (v+ - v) = -dt/2 K (u+ + u) - dt/2 K (v+ + v) + dt M f(u + dt/2 v, t + dt/2)
//
// with M the lumped (quadrature) mass and K the weighted stiffness matrix.
// Eliminating u+ leaves (M + a K) v+ = ... with a = dt^2/4 + dt/2, one
// tridiagonal solve per step. With f = 0 the discrete energy
// 1/2 v'Mv + 1/2 u'Ku decreases by exactly dt |(v+ + v)/2|_K^2.

#include "sdwave/data.hpp"
#include "sdwave/detail/numerics.hpp"
#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"
#include "sdwave/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdwave {

/// coefficient * |u|^p; coefficient 0 switches the equation to its linear part.
struct Nonlinearity {
    double p = 2.0;
    double coefficient = 1.0;

    double operator()(double u) const { return coefficient == 0.0 ? 0.0 : coefficient * std::pow(std::abs(u), p); }
};

/// External forcing g(r, t) added to the right-hand side.
using SourceTerm = std::function<double(double r, double t)>;

struct HistoryRow {
    double t = 0.0;
    double sup_u = 0.0;
    double l2_u = 0.0;
    double h1_semi_u = 0.0;
    double l2_v = 0.0;
    double dt = 0.0;
    double boundary_activity = 0.0;
};

struct StateNorms {
    double sup_u = 0.0;
    double l2_u = 0.0;
    double h1_semi_u = 0.0;
    double l2_v = 0.0;

    /// ||u||_{H^1} + ||u_t||_2, the quantity that diverges at a blow-up time.
    double blowup_norm() const { return std::sqrt(l2_u * l2_u + h1_semi_u * h1_semi_u) + l2_v; }
};

/// Fraction of outermost nodes watched for truncation pollution.
inline constexpr double kOuterBandFraction = 0.05;

inline double boundary_activity(const RadialField& u)
{
    const std::size_t m = u.size();
    const auto band = static_cast<std::size_t>(std::ceil(kOuterBandFraction * static_cast<double>(m)));
    double a = 0.0;
    for (std::size_t i = m - std::min(band, m); i < m; ++i) a = std::max(a, std::abs(u[i]));
    return a;
}

inline double stiffness_energy(const RadialGrid& grid, std::span<const double> u)
{
    const auto flux = grid.flux_coefficients();
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double d = u[i + 1] - u[i];
        e += flux[i] * d * d;
    }
    return e;
}

inline StateNorms measure(const RadialField& u, const RadialField& v)
{
    const RadialGrid& grid = u.grid();
    const auto w = grid.quad_weights();
    StateNorms n;
    double l2u = 0.0, l2v = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        n.sup_u = std::max(n.sup_u, std::abs(u[i]));
        l2u += w[i] * u[i] * u[i];
        l2v += w[i] * v[i] * v[i];
    }
    n.l2_u = std::sqrt(l2u);
    n.l2_v = std::sqrt(l2v);
    n.h1_semi_u = std::sqrt(stiffness_energy(grid, u.values()));
    return n;
}

struct SolverState {
    RadialField u;
    RadialField v;
    double time = 0.0;
    double dt = 0.0;
    std::vector<HistoryRow> history;
    /// Running max of |u| on the outermost 5% of nodes.
    double outer_boundary_activity = 0.0;
};

/// 1/2 ||v||^2 + 1/2 ||grad u||^2 in the discrete inner products.
inline double discrete_energy(const SolverState& s)
{
    const auto w = s.u.grid().quad_weights();
    double kinetic = 0.0;
    for (std::size_t i = 0; i < s.v.size(); ++i) kinetic += w[i] * s.v[i] * s.v[i];
    return 0.5 * kinetic + 0.5 * stiffness_energy(s.u.grid(), s.u.values());
}

inline HistoryRow history_row(const SolverState& s, double dt)
{
    const StateNorms n = measure(s.u, s.v);
    return {s.time, n.sup_u, n.l2_u, n.h1_semi_u, n.l2_v, dt, boundary_activity(s.u)};
}

inline SolverState make_initial_state(const InitialData& data, double dt)
{
    require(data.u0.grid().same_as(data.u1.grid()), ErrorKind::FieldMismatch, "u0 and u1 live on different grids");
    SolverState s{data.u0, data.u1, 0.0, dt, {}, 0.0};
    const std::size_t last = s.u.size() - 1;
    s.u[0] = s.u[last] = 0.0;
    s.v[0] = s.v[last] = 0.0;
    s.history.push_back(history_row(s, 0.0));
    s.outer_boundary_activity = s.history.back().boundary_activity;
    return s;
}

namespace detail {

struct Fields {
    std::vector<double> u;
    std::vector<double> v;
};

inline bool all_finite(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double a) { return std::isfinite(a); });
}

// One step of the scheme; boundary nodes stay at zero.
inline Fields advance(const RadialGrid& grid, std::span<const double> u, std::span<const double> v, double t,
                      double dt, const Nonlinearity& nl, const SourceTerm& forcing)
{
    const std::size_t m = grid.size();
    const std::size_t n = m - 2;
    const auto r = grid.nodes();
    const auto w = grid.quad_weights();
    const auto flux = grid.flux_coefficients();
    const double a = 0.25 * dt * dt + 0.5 * dt;
    const double t_half = t + 0.5 * dt;

    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = j + 1;
        lower[j] = -a * flux[i - 1];
        upper[j] = -a * flux[i];
        diag[j] = w[i] + a * (flux[i - 1] + flux[i]);
        double source = nl(u[i] + 0.5 * dt * v[i]);
        if (forcing) source += forcing(r[i], t_half);
        rhs[j] = w[i] * v[i] - dt * stiffness_row(grid, u, i) - a * stiffness_row(grid, v, i) + dt * w[i] * source;
    }
    const std::vector<double> v_inner = solve_tridiagonal(lower, diag, upper, rhs);

    Fields out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = j + 1;
        out.v[i] = v_inner[j];
        out.u[i] = u[i] + 0.5 * dt * (v[i] + v_inner[j]);
    }
    return out;
}

inline void commit(SolverState& s, Fields&& f, double dt)
{
    const RadialGrid& grid = s.u.grid();
    s.u = RadialField(grid, std::move(f.u));
    s.v = RadialField(grid, std::move(f.v));
    s.time += dt;
    s.dt = dt;
    s.history.push_back(history_row(s, dt));
    s.outer_boundary_activity = std::max(s.outer_boundary_activity, s.history.back().boundary_activity);
}

} // namespace detail

/// Advances the state by state.dt. Throws NonFinite if the new fields
/// overflow (typically a blow-up the caller stepped past).
inline SolverState step(SolverState state, const Nonlinearity& nl, const SourceTerm& forcing = {})
{
    require(state.dt > 0.0 && std::isfinite(state.dt), ErrorKind::InvalidArgument, "dt must be positive");
    const double dt = state.dt;
    detail::Fields f = detail::advance(state.u.grid(), state.u.values(), state.v.values(), state.time, dt, nl, forcing);
    require(detail::all_finite(f.u) && detail::all_finite(f.v), ErrorKind::NonFinite,
            "non-finite values at t = " + std::to_string(state.time + dt));
    detail::commit(state, std::move(f), dt);
    return state;
}

struct RunControls {
    double t_end = 1.0;
    double dt0 = 1e-2;
    double blowup_threshold = 1e6;
    double dt_floor = 1e-12;
    /// Step-size cap dt <= cfl / sqrt(p * coefficient * sup|u|^{p-1}).
    double nonlinear_cfl = 0.05;
    /// Solution snapshots kept for diagnostics every this many steps.
    int snapshot_stride = 16;
    /// Inconclusive once outer-band activity exceeds this fraction of sup|u|.
    double pollution_ratio = 1e-6;
    std::size_t max_steps = 50'000'000;
};

enum class Verdict { BlowUp, SurvivedHorizon, Inconclusive };
enum class BlowUpCertainty { Threshold, DtCollapse };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::BlowUp: return "BlowUp";
    case Verdict::SurvivedHorizon: return "SurvivedHorizon";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

inline const char* to_string(BlowUpCertainty c)
{
    return c == BlowUpCertainty::Threshold ? "threshold" : "dt_collapse";
}

struct RunOutcome {
    Verdict verdict = Verdict::SurvivedHorizon;
    /// Earliest time ||u||_{H1} + ||u_t||_2 crosses the threshold (BlowUp only).
    double t_max_estimate = std::numeric_limits<double>::quiet_NaN();
    BlowUpCertainty certainty = BlowUpCertainty::Threshold;
    /// t* from fitting sup|u| ~ (t* - t)^{-2/(p-1)} over the last decade of growth.
    double t_star_fit = std::numeric_limits<double>::quiet_NaN();
    double t_end = 0.0;
    std::string reason;
    StateNorms final_norms;
    double final_time = 0.0;
    // resolution metadata
    std::size_t cells = 0;
    double dt0 = 0.0;
    double min_dt = 0.0;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

/// Stored solution snapshots for space-time diagnostics.
struct Trajectory {
    RadialGrid grid;
    RadialField u0;
    RadialField u1;
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::optional<double> blowup_time;

    double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

struct RunResult {
    RunOutcome outcome;
    std::vector<HistoryRow> history;
    Trajectory trajectory;
};

namespace detail {

inline double fit_blowup_time(const std::vector<HistoryRow>& history, double p)
{
    if (history.size() < 3 || !(p > 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const double top = history.back().sup_u;
    std::vector<double> t, y;
    for (const auto& row : history) {
        if (row.sup_u >= 0.1 * top && row.sup_u > 0.0) {
            t.push_back(row.t);
            y.push_back(std::pow(row.sup_u, -0.5 * (p - 1.0)));
        }
    }
    if (t.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const LineFit fit = fit_line(t, y);
    if (!(fit.slope < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return -fit.intercept / fit.slope;
}

inline bool norms_growing(const std::vector<HistoryRow>& h, std::size_t window)
{
    if (h.size() < window + 1) return false;
    for (std::size_t j = h.size() - window; j < h.size(); ++j) {
        const StateNorms a{h[j - 1].sup_u, h[j - 1].l2_u, h[j - 1].h1_semi_u, h[j - 1].l2_v};
        const StateNorms b{h[j].sup_u, h[j].l2_u, h[j].h1_semi_u, h[j].l2_v};
        if (!(b.blowup_norm() > a.blowup_norm())) return false;
    }
    return true;
}

inline double row_norm(const HistoryRow& r) { return StateNorms{r.sup_u, r.l2_u, r.h1_semi_u, r.l2_v}.blowup_norm(); }

} // namespace detail

/// Largest admissible p for the local theory when n >= 3.
inline double energy_exponent_limit(int dim)
{
    return dim >= 3 ? static_cast<double>(dim) / (dim - 2) : std::numeric_limits<double>::infinity();
}

/// Integrates from the validated data until blow-up is detected, the horizon
/// is reached, or truncation pollution makes the run inconclusive.
inline RunResult run(const RadialGrid& grid, const InitialData& raw_data, const Nonlinearity& nl,
                     const RunControls& controls)
{
    require(nl.p > 1.0 && std::isfinite(nl.p), ErrorKind::InvalidArgument, "p must exceed 1");
    require(controls.t_end > 0.0 && controls.dt0 > 0.0 && controls.blowup_threshold > 0.0 && controls.dt_floor > 0.0 &&
                controls.nonlinear_cfl > 0.0 && controls.snapshot_stride > 0,
            ErrorKind::InvalidArgument, "run controls must be positive");
    const InitialData data = validate_initial_data(raw_data, grid);

    RunOutcome out;
    out.t_end = controls.t_end;
    out.cells = grid.cells();
    out.dt0 = controls.dt0;
    out.min_dt = controls.dt0;
    if (grid.dim() >= 3 && nl.p > energy_exponent_limit(grid.dim()))
        out.warnings.push_back("p = " + std::to_string(nl.p) + " exceeds n/(n-2) = " +
                               std::to_string(energy_exponent_limit(grid.dim())) +
                               "; outside the local well-posedness range");

    SolverState s = make_initial_state(data, controls.dt0);
    Trajectory traj{grid, data.u0, data.u1, {}, {}, std::nullopt};
    traj.times.push_back(0.0);
    traj.u.emplace_back(s.u.values().begin(), s.u.values().end());

    double sup_max = s.history.back().sup_u;
    bool finished = false;
    auto snapshot = [&] {
        if (traj.times.back() == s.time) return;
        traj.times.push_back(s.time);
        traj.u.emplace_back(s.u.values().begin(), s.u.values().end());
    };
    auto blow_up = [&](BlowUpCertainty certainty, double t_est, std::string reason) {
        out.verdict = Verdict::BlowUp;
        out.certainty = certainty;
        out.t_max_estimate = t_est;
        out.reason = std::move(reason);
        traj.blowup_time = t_est;
        finished = true;
    };

    const double t_tol = 1e-13 * controls.t_end;
    while (!finished && s.time < controls.t_end - t_tol) {
        require(out.steps < controls.max_steps, ErrorKind::Precondition, "step budget exhausted");
        const double sup = s.history.back().sup_u;
        double dt = controls.dt0;
        const double stiffness = nl.p * nl.coefficient * std::pow(sup, nl.p - 1.0);
        if (stiffness > 0.0) dt = std::min(dt, controls.nonlinear_cfl / std::sqrt(stiffness));

        if (dt < controls.dt_floor && detail::norms_growing(s.history, 3)) {
            blow_up(BlowUpCertainty::DtCollapse, s.time, "step size collapsed below dt_floor with growing norms");
            break;
        }
        dt = std::min(dt, controls.t_end - s.time);

        detail::Fields next;
        while (true) {
            next = detail::advance(grid, s.u.values(), s.v.values(), s.time, dt, nl, {});
            if (detail::all_finite(next.u) && detail::all_finite(next.v)) break;
            dt *= 0.5;
            if (dt < controls.dt_floor) break;
        }
        if (dt < controls.dt_floor) {
            blow_up(BlowUpCertainty::DtCollapse, s.time, "non-finite values persisted down to dt_floor");
            break;
        }

        const double prev_norm = detail::row_norm(s.history.back());
        const double prev_time = s.time;
        detail::commit(s, std::move(next), dt);
        ++out.steps;
        out.min_dt = std::min(out.min_dt, dt);
        if (out.steps % static_cast<std::size_t>(controls.snapshot_stride) == 0) snapshot();

        const HistoryRow& row = s.history.back();
        sup_max = std::max(sup_max, row.sup_u);
        const double norm = detail::row_norm(row);
        if (norm > controls.blowup_threshold) {
            double t_cross = s.time;
            if (prev_norm > 0.0 && norm > prev_norm) {
                const double frac = (std::log(controls.blowup_threshold) - std::log(prev_norm)) /
                                    (std::log(norm) - std::log(prev_norm));
                t_cross = prev_time + std::clamp(frac, 0.0, 1.0) * (s.time - prev_time);
            }
            blow_up(BlowUpCertainty::Threshold, t_cross, "||u||_H1 + ||u_t||_2 exceeded the blow-up threshold");
            break;
        }
        if (sup_max > 0.0 && s.outer_boundary_activity > controls.pollution_ratio * sup_max) {
            out.verdict = Verdict::Inconclusive;
            out.reason = "outer-boundary activity exceeded the pollution ratio (truncation radius too small)";
            finished = true;
        }
    }
    snapshot();

    if (!finished) out.verdict = Verdict::SurvivedHorizon;
    if (out.verdict == Verdict::BlowUp) out.t_star_fit = detail::fit_blowup_time(s.history, nl.p);
    out.final_time = s.time;
    const HistoryRow& last = s.history.back();
    out.final_norms = {last.sup_u, last.l2_u, last.h1_semi_u, last.l2_v};
    return RunResult{std::move(out), std::move(s.history), std::move(traj)};
}

/// Exact solution u(r, t) with the derivative combinations the equation needs.
struct SpaceTimeFunction {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dt;
    std::function<double(double, double)> dtt;
    std::function<double(double, double)> laplacian;
    std::function<double(double, double)> laplacian_dt;
};

/// u(r, t) = g(r) a(t) with radial Laplacian g'' + (n-1)/r g'.
inline SpaceTimeFunction separable_solution(int dim, std::function<Jet(double)> space, std::function<Jet(double)> time)
{
    auto lap = [dim, space](double r) {
        const Jet g = space(r);
        return dim == 1 ? g.d2 : g.d2 + (dim - 1) / r * g.d1;
    };
    return {
        [=](double r, double t) { return space(r).value * time(t).value; },
        [=](double r, double t) { return space(r).value * time(t).d1; },
        [=](double r, double t) { return space(r).value * time(t).d2; },
        [=](double r, double t) { return lap(r) * time(t).value; },
        [=](double r, double t) { return lap(r) * time(t).d1; },
    };
}

/// e^{-decay t} sin(pi (r - r0) / (r_max - r0)).
inline SpaceTimeFunction sine_mode_solution(int dim, double r0, double r_max, double decay = 1.0)
{
    const double k = std::numbers::pi / (r_max - r0);
    return separable_solution(
        dim,
        [=](double r) {
            const double x = k * (r - r0);
            return Jet{std::sin(x), k * std::cos(x), -k * k * std::sin(x)};
        },
        [=](double t) {
            const double e = std::exp(-decay * t);
            return Jet{e, -decay * e, decay * decay * e};
        });
}

inline SpaceTimeFunction zero_solution()
{
    auto zero = [](double, double) { return 0.0; };
    return {zero, zero, zero, zero, zero};
}

/// Forcing that makes `exact` solve u_tt - Lap u - Lap u_t = N(u) + g.
inline SourceTerm manufactured_forcing(const SpaceTimeFunction& exact, const Nonlinearity& nl)
{
    return [exact, nl](double r, double t) {
        return exact.dtt(r, t) - exact.laplacian(r, t) - exact.laplacian_dt(r, t) - nl(exact.value(r, t));
    };
}

/// Inserts the midpoint of every cell.
inline RadialGrid refine(const RadialGrid& grid)
{
    const auto r = grid.nodes();
    std::vector<double> nodes;
    nodes.reserve(2 * r.size() - 1);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        nodes.push_back(r[i]);
        nodes.push_back(0.5 * (r[i] + r[i + 1]));
    }
    nodes.push_back(r.back());
    return RadialGrid(grid.dim(), grid.r_obstacle(), std::move(nodes));
}

struct ManufacturedControls {
    double t_end = 0.5;
    /// Time step on the base grid; halved with every spatial refinement.
    double dt = 0.02;
    int levels = 3;
};

struct ConvergenceLevel {
    std::size_t cells = 0;
    double h = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    double max_error = 0.0;
    double l2_error = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    /// Least-squares slope of log(max_error) against log(h); NaN when errors vanish.
    double order = std::numeric_limits<double>::quiet_NaN();
    double l2_order = std::numeric_limits<double>::quiet_NaN();
};

/// Runs the equation with manufactured forcing on `base` and its successive
/// refinements (space and time refined together) and fits the error order.
inline ConvergenceReport manufactured_run(const RadialGrid& base, const SpaceTimeFunction& exact, const Nonlinearity& nl,
                                          const ManufacturedControls& controls)
{
    require(controls.levels >= 3, ErrorKind::InsufficientPoints, "need >= 3 resolutions");
    require(controls.t_end > 0.0 && controls.dt > 0.0, ErrorKind::InvalidArgument, "t_end and dt must be positive");
    for (double t : {0.0, 0.5 * controls.t_end, controls.t_end}) {
        require(std::abs(exact.value(base.r_obstacle(), t)) <= 1e-12, ErrorKind::Precondition,
                "exact solution does not vanish at the obstacle");
        require(std::abs(exact.value(base.r_max(), t)) <= 1e-12, ErrorKind::Precondition,
                "exact solution does not vanish at the truncation radius");
    }

    const SourceTerm forcing = manufactured_forcing(exact, nl);
    ConvergenceReport report;
    RadialGrid grid = base;
    double dt_target = controls.dt;
    for (int level = 0; level < controls.levels; ++level) {
        const auto steps = static_cast<std::size_t>(std::ceil(controls.t_end / dt_target - 1e-9));
        const double dt = controls.t_end / static_cast<double>(steps);
        InitialData data{RadialField::sample(grid, [&](double r) { return exact.value(r, 0.0); }),
                         RadialField::sample(grid, [&](double r) { return exact.dt(r, 0.0); }), "manufactured"};
        SolverState s = make_initial_state(data, dt);
        for (std::size_t n = 0; n < steps; ++n) {
            detail::Fields f = detail::advance(grid, s.u.values(), s.v.values(), s.time, dt, nl, forcing);
            require(detail::all_finite(f.u) && detail::all_finite(f.v), ErrorKind::NonFinite,
                    "manufactured run produced non-finite values");
            s.u = RadialField(grid, std::move(f.u));
            s.v = RadialField(grid, std::move(f.v));
            s.time = static_cast<double>(n + 1) * dt;
        }

        ConvergenceLevel lv{grid.cells(), grid.max_spacing(), dt, steps, 0.0, 0.0};
        std::vector<double> err2(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double e = s.u[i] - exact.value(grid.node(i), s.time);
            lv.max_error = std::max(lv.max_error, std::abs(e));
            err2[i] = e * e;
        }
        lv.l2_error = std::sqrt(integrate(grid, err2));
        report.levels.push_back(lv);

        grid = refine(grid);
        dt_target *= 0.5;
    }

    std::vector<double> h, e_max, e_l2;
    for (const auto& lv : report.levels) {
        h.push_back(lv.h);
        e_max.push_back(lv.max_error);
        e_l2.push_back(lv.l2_error);
    }
    const bool positive = std::all_of(e_max.begin(), e_max.end(), [](double e) { return e > 0.0; });
    if (positive) {
        report.order = detail::fit_loglog(h, e_max).slope;
        report.l2_order = detail::fit_loglog(h, e_l2).slope;
    }
    return report;
}

/// Trajectory of a known solution sampled at the given times.
inline Trajectory sample_trajectory(const RadialGrid& grid, const SpaceTimeFunction& exact, std::span<const double> times)
{
    require(!times.empty() && times.front() == 0.0, ErrorKind::InvalidArgument, "sample times must start at 0");
    Trajectory traj{grid,
                    RadialField::sample(grid, [&](double r) { return exact.value(r, 0.0); }),
                    RadialField::sample(grid, [&](double r) { return exact.dt(r, 0.0); }),
                    {},
                    {},
                    std::nullopt};
    for (double t : times) {
        traj.times.push_back(t);
        std::vector<double> u(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) u[i] = exact.value(grid.node(i), t);
        traj.u.push_back(std::move(u));
    }
    return traj;
}

} // namespace sdwave

#pragma once

#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace sdwave {

/// Initial data (u0, u1) of the Cauchy-Dirichlet problem.
struct InitialData {
    RadialField u0;
    RadialField u1;
    std::string description;
};

/// Values below -tolerance are a negativity violation; values in
/// [-tolerance, 0) are round-off and get clamped.
inline constexpr double kDataTolerance = 1e-12;

/// Checks u0, u1 >= 0 and u0 = u1 = 0 on the obstacle; returns a clamped copy.
inline InitialData validate_initial_data(const InitialData& data, const RadialGrid& grid)
{
    require_on_grid(grid, data.u0);
    require_on_grid(grid, data.u1);

    InitialData out = data;
    auto check = [&](RadialField& f, const char* name) {
        require(std::abs(f[0]) <= kDataTolerance, ErrorKind::BoundaryMismatch,
                std::string(name) + " does not vanish on the obstacle (value " + std::to_string(f[0]) + ")");
        for (std::size_t i = 0; i < f.size(); ++i) {
            require(std::isfinite(f[i]), ErrorKind::NegativeData, std::string(name) + " is not finite");
            require(f[i] >= -kDataTolerance, ErrorKind::NegativeData,
                    std::string(name) + " is negative at r = " + std::to_string(grid.node(i)));
            if (f[i] < 0.0) f[i] = 0.0;
        }
        f[0] = 0.0;
    };
    check(out.u0, "u0");
    check(out.u1, "u1");
    return out;
}

// Analytic radial profiles used to parameterise initial data.

struct ZeroProfile {};

/// amplitude * exp(1 - 1/(1 - s^2)), s = (r - center)/width; compactly
/// supported on [center - width, center + width] with peak = amplitude.
struct BumpProfile {
    double amplitude = 1.0;
    double center = 1.0;
    double width = 1.0;
};

/// amplitude * (r - r0) * exp(-rate (r - r0)).
struct ExpDecayProfile {
    double amplitude = 1.0;
    double rate = 1.0;
};

/// Raw nodal values; no analytic derivative.
struct ArrayProfile {
    std::vector<double> values;
};

using DataProfile = std::variant<ZeroProfile, BumpProfile, ExpDecayProfile, ArrayProfile>;

inline bool has_analytic_form(const DataProfile& profile)
{
    return !std::holds_alternative<ArrayProfile>(profile);
}

/// Value (first) and radial derivative (second) of an analytic profile.
inline std::pair<double, double> eval_profile(const DataProfile& profile, double r, double r0)
{
    if (std::holds_alternative<ZeroProfile>(profile)) return {0.0, 0.0};
    if (const auto* b = std::get_if<BumpProfile>(&profile)) {
        const double s = (r - b->center) / b->width;
        if (std::abs(s) >= 1.0) return {0.0, 0.0};
        const double g = 1.0 - s * s;
        const double value = b->amplitude * std::exp(1.0 - 1.0 / g);
        return {value, value * (-2.0 * s / (g * g)) / b->width};
    }
    if (const auto* e = std::get_if<ExpDecayProfile>(&profile)) {
        const double x = r - r0;
        const double decay = std::exp(-e->rate * x);
        return {e->amplitude * x * decay, e->amplitude * decay * (1.0 - e->rate * x)};
    }
    throw Error(ErrorKind::InvalidArgument, "array profiles have no analytic form");
}

inline RadialField sample_profile(const DataProfile& profile, const RadialGrid& grid)
{
    if (const auto* a = std::get_if<ArrayProfile>(&profile)) return RadialField(grid, a->values);
    return RadialField::sample(grid, [&](double r) { return eval_profile(profile, r, grid.r_obstacle()).first; });
}

inline RadialField sample_profile_gradient(const DataProfile& profile, const RadialGrid& grid)
{
    return RadialField::sample(grid, [&](double r) { return eval_profile(profile, r, grid.r_obstacle()).second; });
}

/// Multiplies the amplitude of an analytic profile (or every array value).
inline DataProfile scaled(DataProfile profile, double factor)
{
    std::visit(
        [factor](auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, BumpProfile> || std::is_same_v<P, ExpDecayProfile>)
                p.amplitude *= factor;
            else if constexpr (std::is_same_v<P, ArrayProfile>)
                for (double& v : p.values) v *= factor;
        },
        profile);
    return profile;
}

inline std::string describe(const DataProfile& profile)
{
    if (std::holds_alternative<ZeroProfile>(profile)) return "zero";
    if (const auto* b = std::get_if<BumpProfile>(&profile))
        return "bump(amplitude=" + std::to_string(b->amplitude) + ", center=" + std::to_string(b->center) +
               ", width=" + std::to_string(b->width) + ")";
    if (const auto* e = std::get_if<ExpDecayProfile>(&profile))
        return "exp_decay(amplitude=" + std::to_string(e->amplitude) + ", rate=" + std::to_string(e->rate) + ")";
    return "array(" + std::to_string(std::get<ArrayProfile>(profile).values.size()) + " values)";
}

inline InitialData make_initial_data(const DataProfile& u0, const DataProfile& u1, const RadialGrid& grid)
{
    return {sample_profile(u0, grid), sample_profile(u1, grid), "u0=" + describe(u0) + "; u1=" + describe(u1)};
}

} // namespace sdwave

#pragma once

#include "sdwave/cutoffs.hpp"
#include "sdwave/data.hpp"
#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"
#include "sdwave/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace sdwave {

using json = nlohmann::ordered_json;

/// One simulation: geometry, data, controls and cut-off settings.
struct RunConfig {
    int dim = 1;
    double p = 2.0;
    double r_obstacle = 0.0;
    /// Unset means r_obstacle + 4 t_end.
    std::optional<double> r_max;
    int cells = 512;
    Grading grading;
    DataProfile u0 = ZeroProfile{};
    DataProfile u1 = ZeroProfile{};
    RunControls controls;
    /// Unset means default_cutoff_power(p).
    std::optional<int> ell;
    std::optional<int> k;
    std::vector<double> T_ladder;

    double resolved_r_max() const { return r_max.value_or(r_obstacle + 4.0 * controls.t_end); }
    int resolved_ell() const { return ell.value_or(default_cutoff_power(p)); }
    int resolved_k() const { return k.value_or(default_cutoff_power(p)); }
};

/// Phase-diagram sweep: the base run repeated over p and a data-amplitude ladder.
struct SweepSpec {
    RunConfig base;
    std::vector<double> p_values;
    /// Factors applied to both u0 and u1.
    std::vector<double> amplitudes{1.0};
};

/// 1 + 2/(n-1) for n >= 2, 3 for n = 1.
inline double critical_exponent(int dim)
{
    require(dim >= 1, ErrorKind::InvalidDimension, "dim must be >= 1");
    return dim == 1 ? 3.0 : 1.0 + 2.0 / (dim - 1);
}

namespace detail {

inline void config_require(bool ok, const std::string& what) { require(ok, ErrorKind::Config, what); }

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
        config_require(ok, "unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, where + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where)
{
    return j.contains(key) ? get_as<T>(j, key, where) : fallback;
}

inline DataProfile parse_profile(const json& j, const std::string& where, bool allow_arrays)
{
    config_require(j.is_object(), where + " must be an object");
    const auto family = get_as<std::string>(j, "family", where);
    if (family == "zero") {
        reject_unknown_keys(j, {"family"}, where);
        return ZeroProfile{};
    }
    if (family == "bump") {
        reject_unknown_keys(j, {"family", "amplitude", "center", "width"}, where);
        BumpProfile b{get_as<double>(j, "amplitude", where), get_as<double>(j, "center", where),
                      get_as<double>(j, "width", where)};
        config_require(b.amplitude >= 0.0 && std::isfinite(b.amplitude), where + ": amplitude must be >= 0");
        config_require(b.width > 0.0 && std::isfinite(b.width), where + ": width must be positive");
        return b;
    }
    if (family == "exp_decay") {
        reject_unknown_keys(j, {"family", "amplitude", "rate"}, where);
        ExpDecayProfile e{get_as<double>(j, "amplitude", where), get_as<double>(j, "rate", where)};
        config_require(e.amplitude >= 0.0 && std::isfinite(e.amplitude), where + ": amplitude must be >= 0");
        config_require(e.rate > 0.0 && std::isfinite(e.rate), where + ": rate must be positive");
        return e;
    }
    if (family == "array") {
        config_require(allow_arrays, where + ": raw array data requires --allow-array-data");
        reject_unknown_keys(j, {"family", "values"}, where);
        return ArrayProfile{get_as<std::vector<double>>(j, "values", where)};
    }
    throw Error(ErrorKind::Config, where + ": unknown data family '" + family + "'");
}

inline json profile_to_json(const DataProfile& profile)
{
    if (std::holds_alternative<ZeroProfile>(profile)) return {{"family", "zero"}};
    if (const auto* b = std::get_if<BumpProfile>(&profile))
        return {{"family", "bump"}, {"amplitude", b->amplitude}, {"center", b->center}, {"width", b->width}};
    if (const auto* e = std::get_if<ExpDecayProfile>(&profile))
        return {{"family", "exp_decay"}, {"amplitude", e->amplitude}, {"rate", e->rate}};
    return {{"family", "array"}, {"values", std::get<ArrayProfile>(profile).values}};
}

inline Grading parse_grading(const json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        config_require(s == "uniform", "grading must be \"uniform\" or {\"kind\": \"geometric\", \"ratio\": r}");
        return Grading::uniform();
    }
    config_require(j.is_object(), "grading must be a string or an object");
    reject_unknown_keys(j, {"kind", "ratio"}, "grading");
    const auto kind = get_as<std::string>(j, "kind", "grading");
    if (kind == "uniform") return Grading::uniform();
    config_require(kind == "geometric", "unknown grading kind '" + kind + "'");
    const double ratio = get_as<double>(j, "ratio", "grading");
    config_require(ratio > 1.0 && std::isfinite(ratio), "geometric grading ratio must exceed 1");
    return Grading::geometric(ratio);
}

} // namespace detail

/// Parses and validates a run configuration; every failure is ErrorKind::Config.
inline RunConfig parse_run_config(const json& j, bool allow_arrays = false)
{
    using namespace detail;
    config_require(j.is_object(), "run config must be a JSON object");
    reject_unknown_keys(j, {"dim", "p", "r_obstacle", "r_max", "cells", "grading", "data", "controls", "cutoff",
                            "T_ladder"},
                        "config");
    RunConfig c;
    c.dim = get_as<int>(j, "dim", "config");
    config_require(c.dim >= 1, "dim must be >= 1");
    c.p = get_as<double>(j, "p", "config");
    config_require(std::isfinite(c.p) && c.p > 1.0, "p must exceed 1");
    c.r_obstacle = get_or<double>(j, "r_obstacle", c.dim == 1 ? 0.0 : 1.0, "config");
    if (c.dim == 1)
        config_require(c.r_obstacle == 0.0, "r_obstacle must be 0 for dim = 1");
    else
        config_require(c.r_obstacle > 0.0 && std::isfinite(c.r_obstacle), "r_obstacle must be positive for dim >= 2");
    if (j.contains("r_max")) c.r_max = get_as<double>(j, "r_max", "config");
    c.cells = get_or<int>(j, "cells", c.cells, "config");
    config_require(c.cells >= 8, "cells must be >= 8");
    if (j.contains("grading")) c.grading = parse_grading(j.at("grading"));

    if (j.contains("data")) {
        const json& d = j.at("data");
        config_require(d.is_object(), "data must be an object");
        reject_unknown_keys(d, {"u0", "u1"}, "data");
        if (d.contains("u0")) c.u0 = parse_profile(d.at("u0"), "data.u0", allow_arrays);
        if (d.contains("u1")) c.u1 = parse_profile(d.at("u1"), "data.u1", allow_arrays);
    }

    if (j.contains("controls")) {
        const json& k = j.at("controls");
        config_require(k.is_object(), "controls must be an object");
        reject_unknown_keys(k, {"t_end", "dt0", "blowup_threshold", "dt_floor", "nonlinear_cfl", "snapshot_stride",
                                "pollution_ratio"},
                            "controls");
        RunControls& rc = c.controls;
        rc.t_end = get_or<double>(k, "t_end", rc.t_end, "controls");
        rc.dt0 = get_or<double>(k, "dt0", rc.dt0, "controls");
        rc.blowup_threshold = get_or<double>(k, "blowup_threshold", rc.blowup_threshold, "controls");
        rc.dt_floor = get_or<double>(k, "dt_floor", rc.dt_floor, "controls");
        rc.nonlinear_cfl = get_or<double>(k, "nonlinear_cfl", rc.nonlinear_cfl, "controls");
        rc.snapshot_stride = get_or<int>(k, "snapshot_stride", rc.snapshot_stride, "controls");
        rc.pollution_ratio = get_or<double>(k, "pollution_ratio", rc.pollution_ratio, "controls");
    }
    const RunControls& rc = c.controls;
    for (double v : {rc.t_end, rc.dt0, rc.blowup_threshold, rc.dt_floor, rc.nonlinear_cfl, rc.pollution_ratio})
        config_require(std::isfinite(v) && v > 0.0, "controls must be positive and finite");
    config_require(rc.snapshot_stride > 0, "controls.snapshot_stride must be positive");
    config_require(rc.dt_floor < rc.dt0, "controls.dt_floor must be below dt0");

    const double r_max = c.resolved_r_max();
    config_require(std::isfinite(r_max) && r_max > c.r_obstacle, "r_max must exceed r_obstacle");

    if (j.contains("cutoff")) {
        const json& k = j.at("cutoff");
        config_require(k.is_object(), "cutoff must be an object");
        reject_unknown_keys(k, {"ell", "k"}, "cutoff");
        if (k.contains("ell")) c.ell = get_as<int>(k, "ell", "cutoff");
        if (k.contains("k")) c.k = get_as<int>(k, "k", "cutoff");
    }
    if (j.contains("T_ladder")) c.T_ladder = get_as<std::vector<double>>(j, "T_ladder", "config");
    return c;
}

inline json to_json(const RunConfig& c)
{
    json g = c.grading.kind == Grading::Kind::Uniform ? json("uniform")
                                                       : json{{"kind", "geometric"}, {"ratio", c.grading.ratio}};
    return {
        {"dim", c.dim},
        {"p", c.p},
        {"r_obstacle", c.r_obstacle},
        {"r_max", c.resolved_r_max()},
        {"cells", c.cells},
        {"grading", g},
        {"data", {{"u0", detail::profile_to_json(c.u0)}, {"u1", detail::profile_to_json(c.u1)}}},
        {"controls",
         {{"t_end", c.controls.t_end},
          {"dt0", c.controls.dt0},
          {"blowup_threshold", c.controls.blowup_threshold},
          {"dt_floor", c.controls.dt_floor},
          {"nonlinear_cfl", c.controls.nonlinear_cfl},
          {"snapshot_stride", c.controls.snapshot_stride},
          {"pollution_ratio", c.controls.pollution_ratio}}},
        {"cutoff", {{"ell", c.resolved_ell()}, {"k", c.resolved_k()}}},
        {"T_ladder", c.T_ladder},
    };
}

inline SweepSpec parse_sweep_spec(const json& j, bool allow_arrays = false)
{
    using namespace detail;
    config_require(j.is_object(), "sweep spec must be a JSON object");
    reject_unknown_keys(j, {"base", "p_values", "amplitudes"}, "sweep");
    SweepSpec s;
    config_require(j.contains("base"), "sweep spec needs a base run config");
    json base = j.at("base");
    // p is swept; the base may omit it.
    if (base.is_object() && !base.contains("p")) base["p"] = 2.0;
    s.base = parse_run_config(base, allow_arrays);
    s.p_values = get_as<std::vector<double>>(j, "p_values", "sweep");
    config_require(!s.p_values.empty(), "p_values must not be empty");
    config_require(std::is_sorted(s.p_values.begin(), s.p_values.end()), "p_values must be sorted");
    for (double p : s.p_values) config_require(std::isfinite(p) && p > 1.0, "every p must exceed 1");
    if (j.contains("amplitudes")) s.amplitudes = get_as<std::vector<double>>(j, "amplitudes", "sweep");
    config_require(!s.amplitudes.empty(), "amplitudes must not be empty");
    for (double a : s.amplitudes) config_require(std::isfinite(a) && a >= 0.0, "amplitudes must be >= 0");
    return s;
}

inline json parse_json_text(const std::string& text, const std::string& source)
{
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, source + ": " + e.what());
    }
}

} // namespace sdwave

#pragma once

// Cut-off functions of the test-function method and the composite test
// function phi(x, t) = phi0(x) * Phi(|x|/T)^l * eta(t^2/T^2)^k.

#include "sdwave/error.hpp"
#include "sdwave/grid.hpp"
#include "sdwave/jet.hpp"
#include "sdwave/weights.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace sdwave {

namespace detail {

// psi(x) = exp(-1/x) for x > 0, with derivatives.
inline Jet mollifier_ramp(double x)
{
    if (x <= 0.0) return {};
    const double e = std::exp(-1.0 / x);
    const double x2 = x * x;
    return {e, e / x2, e * (1.0 / (x2 * x2) - 2.0 / (x2 * x))};
}

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline Jet smooth_step(double x)
{
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const Jet a = mollifier_ramp(x);
    Jet b = mollifier_ramp(1.0 - x);
    b.d1 = -b.d1;
    const double s = a.value + b.value;
    const double num1 = a.d1 * b.value - a.value * b.d1;
    const double num2 = a.d2 * b.value - a.value * b.d2;
    return {a.value / s, num1 / (s * s), (num2 * s - 2.0 * num1 * (a.d1 + b.d1)) / (s * s * s)};
}

} // namespace detail

/// Nonincreasing C-infinity profile: 1 on [0, plateau_end], 0 on [support_end, inf).
class CutoffProfile {
public:
    CutoffProfile(double plateau_end, double support_end)
        : plateau_end_(plateau_end), support_end_(support_end)
    {
        require(support_end > plateau_end && plateau_end >= 0.0, ErrorKind::InvalidArgument,
                "profile needs 0 <= plateau_end < support_end");
    }

    double plateau_end() const noexcept { return plateau_end_; }
    double support_end() const noexcept { return support_end_; }

    Jet operator()(double s) const
    {
        const double width = support_end_ - plateau_end_;
        const Jet step = detail::smooth_step((s - plateau_end_) / width);
        return {1.0 - step.value, -step.d1 / width, -step.d2 / (width * width)};
    }

    double value(double s) const { return (*this)(s).value; }

private:
    double plateau_end_;
    double support_end_;
};

/// The temporal profile eta: 1 on [0, 1/4], 0 on [1, inf).
inline CutoffProfile make_profile() { return CutoffProfile(0.25, 1.0); }

/// The spatial profile Phi: 1 on [0, 1], 0 on [2, inf).
inline CutoffProfile make_spatial_profile() { return CutoffProfile(1.0, 2.0); }

/// eta_T(t) = eta(t^2 / T^2) and its k-th power.
struct TemporalCutoff {
    double T = 1.0;
    int k = 2;
    CutoffProfile profile = make_profile();

    /// eta_T and its t-derivatives.
    Jet base(double t) const
    {
        const double s = t * t / (T * T);
        const Jet e = profile(s);
        const double ds = 2.0 * t / (T * T);
        return {e.value, e.d1 * ds, e.d2 * ds * ds + e.d1 * 2.0 / (T * T)};
    }

    /// eta_T^k and its t-derivatives.
    Jet power(double t) const
    {
        const Jet e = base(t);
        if (k == 0) return {1.0, 0.0, 0.0};
        const double pk1 = std::pow(e.value, k - 1);
        const double pk2 = k >= 2 ? std::pow(e.value, k - 2) : 0.0;
        return {pk1 * e.value, k * pk1 * e.d1, k * (k - 1.0) * pk2 * e.d1 * e.d1 + k * pk1 * e.d2};
    }
};

/// phi_T(x) = Phi(|x| / T) for a radial argument.
struct SpatialCutoff {
    double T = 1.0;
    int ell = 2;
    CutoffProfile profile = make_spatial_profile();

    /// Phi(r/T) with r-derivatives.
    Jet base(double r) const
    {
        const Jet p = profile(r / T);
        return {p.value, p.d1 / T, p.d2 / (T * T)};
    }

    /// Radial Laplacian of phi_T in dimension n.
    double laplacian(double r, int n) const
    {
        const Jet p = base(r);
        return n == 1 ? p.d2 : p.d2 + (n - 1) / r * p.d1;
    }
};

struct TestFunctionFamily {
    HarmonicWeight weight;
    SpatialCutoff spatial;
    TemporalCutoff temporal;

    double T() const noexcept { return temporal.T; }
};

/// Smallest safe power for the estimates: ceil(2 p') + 2.
inline int default_cutoff_power(double p)
{
    require(p > 1.0, ErrorKind::InvalidArgument, "p must exceed 1");
    return static_cast<int>(std::ceil(2.0 * p / (p - 1.0) - 1e-12)) + 2;
}

inline double holder_conjugate(double p) { return p / (p - 1.0); }

inline TestFunctionFamily make_test_family(const HarmonicWeight& weight, double T, int ell, int k)
{
    require(std::isfinite(T) && T > 0.0, ErrorKind::OutOfDomain, "cut-off horizon T must be > 0");
    require(ell >= 0 && k >= 0, ErrorKind::InvalidArgument, "cut-off powers must be >= 0");
    TestFunctionFamily f;
    f.weight = weight;
    f.spatial.T = T;
    f.spatial.ell = ell;
    f.temporal.T = T;
    f.temporal.k = k;
    return f;
}

enum class Derivative { Value, Dt, Dtt, Laplacian, LaplacianDt };

/// Spatial factor psi(r) = phi0(r) phi_T(r)^l and its radial Laplacian.
struct SpatialFactor {
    double value = 0.0;
    double laplacian = 0.0;
};

inline SpatialFactor spatial_factor(const TestFunctionFamily& f, double r)
{
    const int n = f.weight.dim;
    const int ell = f.spatial.ell;
    const double w = eval_weight(f.weight, r);
    const double dw = eval_weight_gradient(f.weight, r);
    const double lap_w = eval_weight_laplacian(f.weight, r);
    const Jet c = f.spatial.base(r);
    if (ell == 0) return {w, lap_w};

    const double c_l = std::pow(c.value, ell);
    const double c_l1 = std::pow(c.value, ell - 1);
    const double c_l2 = ell >= 2 ? std::pow(c.value, ell - 2) : 0.0;
    const double lap_c = n == 1 ? c.d2 : c.d2 + (n - 1) / r * c.d1;
    // Delta(phi_T^l) = l(l-1) phi_T^{l-2} |phi_T'|^2 + l phi_T^{l-1} Delta phi_T
    const double lap_cl = ell * (ell - 1.0) * c_l2 * c.d1 * c.d1 + ell * c_l1 * lap_c;
    const double grad_cl = ell * c_l1 * c.d1;
    return {w * c_l, c_l * lap_w + 2.0 * dw * grad_cl + w * lap_cl};
}

/// Analytic value or derivative combination of the composite test function.
inline double eval_test_function(const TestFunctionFamily& f, double r, double t, Derivative deriv)
{
    require(std::isfinite(t) && t >= 0.0, ErrorKind::OutOfDomain, "t must be >= 0");
    const SpatialFactor s = spatial_factor(f, r);
    const Jet eta = f.temporal.power(t);
    switch (deriv) {
    case Derivative::Value: return s.value * eta.value;
    case Derivative::Dt: return s.value * eta.d1;
    case Derivative::Dtt: return s.value * eta.d2;
    case Derivative::Laplacian: return s.laplacian * eta.value;
    case Derivative::LaplacianDt: return s.laplacian * eta.d1;
    }
    return 0.0;
}

struct NamedValue {
    std::string name;
    double value = 0.0;
};

using NamedIntegrals = std::vector<NamedValue>;

inline double sum_of(const NamedIntegrals& values)
{
    double s = 0.0;
    for (const auto& v : values) s += v.value;
    return s;
}

inline double value_of(const NamedIntegrals& values, const std::string& name)
{
    for (const auto& v : values)
        if (v.name == name) return v.value;
    throw Error(ErrorKind::InvalidArgument, "no integral named " + name);
}

struct QuadratureOptions {
    /// Uniform trapezoid nodes on [0, T]; 2048 gives 1024 on [T/2, T].
    int time_nodes = 2049;
};

namespace detail {

inline void check_cutoff_exponents(const TestFunctionFamily& f, double p)
{
    require(std::isfinite(p) && p > 1.0, ErrorKind::InvalidArgument, "p must exceed 1");
    const double q = holder_conjugate(p);
    const int k = f.temporal.k;
    const int ell = f.spatial.ell;
    require(k >= 2 && k >= q && ell >= 2.0 * q, ErrorKind::ExponentUnderflow,
            "cut-off powers too small for p' = " + std::to_string(q) + " (k = " +
                std::to_string(k) + ", l = " + std::to_string(ell) +
                "); need k >= max(2, p') and l >= 2p'");
}

inline void check_family_grid(const TestFunctionFamily& f, const RadialGrid& grid)
{
    require(grid.dim() == f.weight.dim, ErrorKind::DimensionMismatch, "grid/weight dimension differ");
    require(grid.r_obstacle() == f.weight.r0, ErrorKind::DimensionMismatch,
            "grid/weight obstacle radius differ");
    require(grid.r_max() >= 2.0 * f.T() * (1.0 - 1e-12), ErrorKind::OutOfDomain,
            "grid (r_max = " + std::to_string(grid.r_max()) + ") does not cover the support 2T = " +
                std::to_string(2.0 * f.T()));
}

// Uniform trapezoid of g over [0, T].
template <class Fn>
double time_integral(double T, int nodes, Fn&& g)
{
    const int cells = std::max(nodes - 1, 2);
    const double h = T / cells;
    double sum = 0.5 * (g(0.0) + g(T));
    for (int j = 1; j < cells; ++j) sum += g(j * h);
    return sum * h;
}

struct CutoffFactors {
    // spatial
    double data = 0.0;      // int_{Omega_1} phi0 phi_T^l
    double weight_grad = 0.0; // int phi0^{1-p'} phi_T^{l-p'} |grad phi0|^{p'} |grad phi_T|^{p'}
    double grad_sq = 0.0;     // int phi0 phi_T^{l-2p'} |grad phi_T|^{2p'}
    double lap = 0.0;         // int phi0 phi_T^{l-p'} |Delta phi_T|^{p'}
    // temporal
    double dt_sq = 0.0;   // int eta^{(k-2)p'} |eta'|^{2p'}
    double dtt = 0.0;     // int eta^{(k-1)p'} |eta''|^{p'}
    double dt = 0.0;      // int eta^{k-p'} |eta'|^{p'}
    double plain = 0.0;   // int eta^k
};

inline CutoffFactors cutoff_factors(const TestFunctionFamily& f, double p, const RadialGrid& grid,
                                    const QuadratureOptions& quad)
{
    check_cutoff_exponents(f, p);
    check_family_grid(f, grid);
    require(f.T() > f.weight.r0, ErrorKind::OutOfDomain, "the cut-off annulus [T, 2T] must clear the obstacle");
    const double q = holder_conjugate(p);
    const int n = grid.dim();
    const double ell = f.spatial.ell;
    const double k = f.temporal.k;
    const auto r = grid.nodes();

    std::vector<double> data(grid.size()), wgrad(grid.size()), gsq(grid.size()), lap(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Jet c = f.spatial.base(r[i]);
        const double phi0 = eval_weight(f.weight, r[i]);
        const double dphi0 = std::abs(eval_weight_gradient(f.weight, r[i]));
        const double lap_c = std::abs(f.spatial.laplacian(r[i], n));
        const double dc = std::abs(c.d1);
        data[i] = phi0 * std::pow(c.value, ell);
        if (dc == 0.0 && lap_c == 0.0) continue;
        wgrad[i] = std::pow(phi0, 1.0 - q) * std::pow(c.value, ell - q) * std::pow(dphi0, q) * std::pow(dc, q);
        gsq[i] = phi0 * std::pow(c.value, ell - 2.0 * q) * std::pow(dc, 2.0 * q);
        lap[i] = phi0 * std::pow(c.value, ell - q) * std::pow(lap_c, q);
    }

    CutoffFactors out;
    out.data = integrate(grid, data);
    out.weight_grad = integrate(grid, wgrad);
    out.grad_sq = integrate(grid, gsq);
    out.lap = integrate(grid, lap);

    const TemporalCutoff& tc = f.temporal;
    const double T = f.T();
    out.dt_sq = time_integral(T, quad.time_nodes, [&](double t) {
        const Jet e = tc.base(t);
        return std::pow(e.value, (k - 2.0) * q) * std::pow(std::abs(e.d1), 2.0 * q);
    });
    out.dtt = time_integral(T, quad.time_nodes, [&](double t) {
        const Jet e = tc.base(t);
        return std::pow(e.value, (k - 1.0) * q) * std::pow(std::abs(e.d2), q);
    });
    out.dt = time_integral(T, quad.time_nodes, [&](double t) {
        const Jet e = tc.base(t);
        return std::pow(e.value, k - q) * std::pow(std::abs(e.d1), q);
    });
    out.plain = time_integral(T, quad.time_nodes,
                              [&](double t) { return std::pow(tc.base(t).value, k); });
    return out;
}

} // namespace detail

/// Names of the eight cut-off integrals bounding I1 + I2 + I3 after Young's
/// inequality, in display order.
inline const std::array<const char*, 8>& rhs_integral_names()
{
    static const std::array<const char*, 8> names = {"I1_a", "I1_b", "I2_a", "I2_b",
                                                     "I2_c", "I3_a", "I3_b", "I3_c"};
    return names;
}

/// The eight space-time cut-off integrals of the Young-inequality bound.
///
/// Young's inequality leaves a factor phi^{-p'/p} on every term, which turns
/// into phi0^{1-p'} on the |grad phi0| terms and phi0 on the pure cut-off
/// terms. Both factors are bounded on the annulus when n >= 3, but they carry
/// the growth of phi0 when n = 1, 2, so they are kept for every n.
///
/// Every integrand factorises into a spatial and a temporal part, so the
/// tensorised trapezoid rule is evaluated as a product of 1-D rules.
inline NamedIntegrals rhs_scaling_integrals(const TestFunctionFamily& f, double p, const RadialGrid& grid,
                                            const QuadratureOptions& quad = {})
{
    const auto c = detail::cutoff_factors(f, p, grid, quad);
    const auto& names = rhs_integral_names();
    return {
        {names[0], c.data * c.dt_sq},
        {names[1], c.data * c.dtt},
        {names[2], c.weight_grad * c.dt},
        {names[3], c.grad_sq * c.dt},
        {names[4], c.lap * c.dt},
        {names[5], c.weight_grad * c.plain},
        {names[6], c.grad_sq * c.plain},
        {names[7], c.lap * c.plain},
    };
}

/// The (.)^{1/p'} companion factors of the Hoelder-inequality estimates of
/// I1, I2, I3, used at the critical exponent.
inline NamedIntegrals holder_factor_integrals(const TestFunctionFamily& f, double p, const RadialGrid& grid,
                                              const QuadratureOptions& quad = {})
{
    const auto j = rhs_scaling_integrals(f, p, grid, quad);
    const double inv_q = 1.0 / holder_conjugate(p);
    const double i1 = j[0].value + j[1].value;
    const double i2 = j[2].value + j[3].value + j[4].value;
    const double i3 = j[5].value + j[6].value + j[7].value;
    return {
        {"holder_I1", std::pow(i1, inv_q)},
        {"holder_I2", std::pow(i2, inv_q)},
        {"holder_I3", std::pow(i3, inv_q)},
    };
}

/// T-exponent of the I1 Hoelder factor, -2 + (1 + n)/p' (n >= 3).
inline double holder_factor_exponent(int dim, double p) { return -2.0 + (1.0 + dim) / holder_conjugate(p); }

} // namespace sdwave

#include "sdwave/data.hpp"
#include "sdwave/solver.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace sdwave;

namespace {

InitialData zero_data(const RadialGrid& g) { return {RadialField(g), RadialField(g), "zero"}; }

InitialData bump_pair(const RadialGrid& g, double amplitude, double center, double width)
{
    const BumpProfile b{amplitude, center, width};
    return make_initial_data(b, b, g);
}

RunControls controls(double t_end, double dt0)
{
    RunControls rc;
    rc.t_end = t_end;
    rc.dt0 = dt0;
    return rc;
}

} // namespace

TEST(Data, AcceptsBumpWithZeroVelocity)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 6.0, 64);
    const InitialData d = make_initial_data(BumpProfile{1.0, 3.0, 1.0}, ZeroProfile{}, g);
    EXPECT_NO_THROW(validate_initial_data(d, g));
}

TEST(Data, RejectsBoundaryMismatch)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 6.0, 64);
    InitialData d = zero_data(g);
    d.u0[0] = 0.5;
    expect_error(ErrorKind::BoundaryMismatch, [&] { validate_initial_data(d, g); });
}

TEST(Data, RejectsNegativeData)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 6.0, 64);
    InitialData d = zero_data(g);
    for (std::size_t i = 1; i < g.size(); ++i) d.u0[i] = -0.1;
    expect_error(ErrorKind::NegativeData, [&] { validate_initial_data(d, g); });
}

TEST(Data, ClampsRoundOff)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 6.0, 64);
    InitialData d = zero_data(g);
    d.u1[5] = -1e-14;
    EXPECT_EQ(validate_initial_data(d, g).u1[5], 0.0);
}

TEST(Data, ProfileDerivativesMatchFiniteDifferences)
{
    const DataProfile profiles[] = {BumpProfile{2.0, 3.0, 1.5}, ExpDecayProfile{5.0, 1.3}};
    for (const auto& p : profiles)
        for (double r : {2.0, 2.7, 3.4, 4.1}) {
            const double h = 1e-6;
            const double fd = (eval_profile(p, r + h, 1.0).first - eval_profile(p, r - h, 1.0).first) / (2 * h);
            EXPECT_NEAR(eval_profile(p, r, 1.0).second, fd, 1e-6);
        }
}

TEST(Solver, ZeroDataStaysZero)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 128);
    const RunResult r = run(g, zero_data(g), {2.0, 1.0}, controls(2.0, 0.01));
    EXPECT_EQ(r.outcome.verdict, Verdict::SurvivedHorizon);
    for (const auto& row : r.history) {
        EXPECT_EQ(row.sup_u, 0.0);
        EXPECT_EQ(row.l2_v, 0.0);
    }
    for (const auto& u : r.trajectory.u)
        for (double x : u) EXPECT_EQ(x, 0.0);
}

TEST(Solver, StepKeepsZeroFixed)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 5.0, 32);
    SolverState s = make_initial_state(zero_data(g), 0.05);
    for (int i = 0; i < 10; ++i) s = step(std::move(s), {3.0, 1.0});
    for (double x : s.u.values()) EXPECT_EQ(x, 0.0);
    EXPECT_NEAR(s.time, 0.5, 1e-12);
}

TEST(Solver, LinearEnergyNonincreasing)
{
    for (int dim : {1, 3}) {
        const double r0 = dim == 1 ? 0.0 : 1.0;
        const RadialGrid g = build_radial_grid(dim, r0, r0 + 10.0, 200, Grading::geometric(2.0));
        SolverState s = make_initial_state(bump_pair(g, 3.0, r0 + 3.0, 1.5), 0.02);
        double prev = discrete_energy(s);
        for (int i = 0; i < 300; ++i) {
            s = step(std::move(s), {2.0, 0.0});
            const double e = discrete_energy(s);
            EXPECT_LE(e, prev + 1e-10 * std::max(1.0, prev)) << "step " << i;
            prev = e;
        }
    }
}

TEST(Solver, DirichletAtBothEnds)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 6.0, 64);
    SolverState s = make_initial_state(bump_pair(g, 1.0, 3.0, 1.0), 0.02);
    for (int i = 0; i < 20; ++i) s = step(std::move(s), {2.0, 1.0});
    EXPECT_EQ(s.u[0], 0.0);
    EXPECT_EQ(s.u[g.size() - 1], 0.0);
    EXPECT_EQ(s.v[0], 0.0);
    EXPECT_EQ(s.v[g.size() - 1], 0.0);
}

TEST(Solver, HistoryTimesIncrease)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 256);
    const RunResult r = run(g, bump_pair(g, 5.0, 4.0, 3.0), {2.0, 1.0}, controls(5.0, 0.01));
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GT(r.history[i].t, r.history[i - 1].t);
}

TEST(Solver, ExpDecayDataBlowsUpConsistently)
{
    std::vector<double> t_max;
    for (int cells : {512, 1024, 2048}) {
        const RadialGrid g = build_radial_grid(1, 0.0, 20.0, cells);
        const ExpDecayProfile e{5.0, 1.0};
        const RunResult r = run(g, make_initial_data(e, e, g), {2.0, 1.0}, controls(10.0, 0.01));
        ASSERT_EQ(r.outcome.verdict, Verdict::BlowUp);
        EXPECT_GT(r.outcome.t_max_estimate, 0.0);
        EXPECT_EQ(r.outcome.certainty, BlowUpCertainty::Threshold);
        t_max.push_back(r.outcome.t_max_estimate);
    }
    // The finest run is the reference.
    for (double t : t_max) EXPECT_NEAR(t / t_max.back(), 1.0, 0.05);
}

TEST(Solver, LargerDataBlowsUpNoLater)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 512);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1.0, 2.0, 4.0}) {
        const RunResult r = run(g, bump_pair(g, 2.0 * lambda, 4.0, 3.0), {2.0, 1.0}, controls(20.0, 0.01));
        ASSERT_EQ(r.outcome.verdict, Verdict::BlowUp);
        EXPECT_LE(r.outcome.t_max_estimate, prev);
        prev = r.outcome.t_max_estimate;
    }
}

TEST(Solver, VerdictStableAcrossResolutions)
{
    for (int dim : {1, 3}) {
        const double r0 = dim == 1 ? 0.0 : 1.0;
        std::vector<Verdict> verdicts;
        for (int cells : {512, 1024, 2048}) {
            const RadialGrid g = build_radial_grid(dim, r0, r0 + 20.0, cells);
            verdicts.push_back(run(g, bump_pair(g, 2.0, r0 + 3.0, 1.5), {2.0, 1.0}, controls(10.0, 0.01)).outcome.verdict);
        }
        EXPECT_EQ(verdicts[0], verdicts[1]);
        EXPECT_EQ(verdicts[1], verdicts[2]);
    }
}

TEST(Solver, BlowUpReportsSelfSimilarFit)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 1024);
    const RunResult r = run(g, bump_pair(g, 5.0, 4.0, 3.0), {3.0, 1.0}, controls(5.0, 0.01));
    ASSERT_EQ(r.outcome.verdict, Verdict::BlowUp);
    ASSERT_TRUE(std::isfinite(r.outcome.t_star_fit));
    EXPECT_GE(r.outcome.t_star_fit, r.outcome.t_max_estimate * 0.99);
    EXPECT_LT(r.outcome.t_star_fit, r.outcome.t_max_estimate * 1.2);
}

TEST(Solver, DtCollapseVerdict)
{
    // A very high threshold leaves the step-size floor as the only signal.
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 256);
    RunControls rc = controls(5.0, 0.01);
    rc.blowup_threshold = 1e300;
    rc.dt_floor = 1e-6;
    const RunResult r = run(g, bump_pair(g, 5.0, 4.0, 3.0), {2.0, 1.0}, rc);
    ASSERT_EQ(r.outcome.verdict, Verdict::BlowUp);
    EXPECT_EQ(r.outcome.certainty, BlowUpCertainty::DtCollapse);
}

TEST(Solver, TruncationPollutionIsInconclusive)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 6.0, 128);
    const RunResult r = run(g, bump_pair(g, 0.1, 3.0, 2.5), {2.0, 1.0}, controls(5.0, 0.01));
    EXPECT_EQ(r.outcome.verdict, Verdict::Inconclusive);
}

TEST(Solver, WarnsOutsideEnergyRange)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 10.0, 64);
    const RunResult r = run(g, zero_data(g), {4.0, 1.0}, controls(0.1, 0.01));
    EXPECT_FALSE(r.outcome.warnings.empty());
    const RunResult ok = run(g, zero_data(g), {3.0, 1.0}, controls(0.1, 0.01));
    EXPECT_TRUE(ok.outcome.warnings.empty());
}

TEST(Solver, RunRejectsBadInputs)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 10.0, 64);
    expect_error(ErrorKind::InvalidArgument, [&] { run(g, zero_data(g), {1.0, 1.0}, controls(1.0, 0.01)); });
    expect_error(ErrorKind::InvalidArgument, [&] { run(g, zero_data(g), {2.0, 1.0}, controls(-1.0, 0.01)); });
}

TEST(Solver, DeterministicHistory)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 20.0, 512);
    const RunResult a = run(g, bump_pair(g, 5.0, 4.0, 3.0), {2.5, 1.0}, controls(5.0, 0.01));
    const RunResult b = run(g, bump_pair(g, 5.0, 4.0, 3.0), {2.5, 1.0}, controls(5.0, 0.01));
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].t, b.history[i].t);
        EXPECT_EQ(a.history[i].sup_u, b.history[i].sup_u);
        EXPECT_EQ(a.history[i].l2_v, b.history[i].l2_v);
    }
}

TEST(Manufactured, SecondOrderDim1)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 8.0, 32);
    const auto rep = manufactured_run(g, sine_mode_solution(1, 0.0, 8.0), {2.0, 1.0}, {});
    EXPECT_GE(rep.order, 1.9);
}

TEST(Manufactured, SecondOrderDim3GradedGrid)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 9.0, 32, Grading::geometric(2.0));
    const auto rep = manufactured_run(g, sine_mode_solution(3, 1.0, 9.0, 0.5), {2.0, 1.0}, {});
    EXPECT_GE(rep.order, 1.9);
    EXPECT_GE(rep.l2_order, 1.9);
}

TEST(Manufactured, ZeroSolutionHasZeroError)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 9.0, 16);
    const auto rep = manufactured_run(g, zero_solution(), {2.0, 1.0}, {});
    for (const auto& lv : rep.levels) EXPECT_EQ(lv.max_error, 0.0);
}

TEST(Manufactured, RejectsNonVanishingExact)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 9.0, 16);
    const auto shifted = separable_solution(
        3, [](double r) { return Jet{1.0 + r, 1.0, 0.0}; }, [](double t) { return Jet{std::exp(-t), -std::exp(-t), std::exp(-t)}; });
    expect_error(ErrorKind::Precondition, [&] { manufactured_run(g, shifted, {2.0, 1.0}, {}); });
}

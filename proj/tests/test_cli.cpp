#include "sdwave/commands.hpp"
#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;
using namespace sdwave;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "sdwave_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path config(const std::string& name) { return fs::path(SDWAVE_CONFIG_DIR) / name; }

fs::path write_json(const fs::path& dir, const json& j)
{
    const fs::path p = dir / "config.json";
    io::write_file(p, j.dump());
    return p;
}

json manifest_of(const fs::path& dir) { return json::parse(io::read_file(dir / "manifest.json")); }

void expect_manifest_complete(const fs::path& dir)
{
    const json m = manifest_of(dir);
    std::size_t listed = 0;
    for (const auto& f : m["files"]) {
        const std::string name = f["name"];
        EXPECT_EQ(io::sha256_hex(io::read_file(dir / name)), f["sha256"].get<std::string>()) << name;
        ++listed;
    }
    std::size_t on_disk = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json") ++on_disk;
    EXPECT_EQ(listed, on_disk);
}

} // namespace

TEST(Io, Sha256KnownVector)
{
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, SeventeenDigits)
{
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, CsvRowWidthChecked)
{
    io::CsvWriter csv({"a", "b"});
    csv.row({1.0, 2.0});
    EXPECT_EQ(csv.str(), "a,b\n1,2\n");
    expect_error(ErrorKind::InvalidArgument, [&] { csv.row({1.0}); });
}

TEST(Config, ParsesExampleConfigs)
{
    for (const char* name : {"dim1_bump.json", "dim1_exp_decay.json", "dim1_zero.json", "dim3_critical.json",
                             "scaling_n3_p1_5.json"})
        EXPECT_NO_THROW(parse_run_config(parse_json_text(io::read_file(config(name)), name))) << name;
    EXPECT_NO_THROW(parse_sweep_spec(parse_json_text(io::read_file(config("sweep_dim1.json")), "sweep")));
}

TEST(Config, Rejections)
{
    auto reject = [](const std::string& text) {
        expect_error(ErrorKind::Config, [&] { parse_run_config(parse_json_text(text, "inline")); });
    };
    reject(R"({"dim": 1, "p": 0.5})");
    reject(R"({"dim": 0, "p": 2})");
    reject(R"({"dim": 3, "p": 2, "r_obstacle": 0})");
    reject(R"({"dim": 1, "p": 2, "cells": 4})");
    reject(R"({"dim": 1, "p": 2, "typo": 1})");
    reject(R"({"dim": 1, "p": 2, "controls": {"t_end": -1}})");
    reject(R"({"dim": 1, "p": 2, "data": {"u0": {"family": "array", "values": [0, 1]}}})");
    reject(R"({"dim": 1, "p": 2, "grading": {"kind": "geometric", "ratio": 0.5}})");
    reject("{not json");
    expect_error(ErrorKind::Config, [] {
        parse_sweep_spec(parse_json_text(R"({"base": {"dim": 1}, "p_values": []})", "inline"));
    });
    expect_error(ErrorKind::Config, [] {
        parse_sweep_spec(parse_json_text(R"({"base": {"dim": 1}, "p_values": [3, 2]})", "inline"));
    });
}

TEST(Config, ArrayDataBehindFlag)
{
    const json j = json::parse(R"({"dim": 1, "p": 2, "data": {"u0": {"family": "array", "values": [0, 1]}}})");
    const RunConfig c = parse_run_config(j, true);
    EXPECT_TRUE(std::holds_alternative<ArrayProfile>(c.u0));
}

TEST(Config, DefaultRmaxFollowsHorizon)
{
    const RunConfig c = parse_run_config(json::parse(R"({"dim": 3, "p": 2, "controls": {"t_end": 2.5}})"));
    EXPECT_DOUBLE_EQ(c.resolved_r_max(), 1.0 + 10.0);
    EXPECT_EQ(c.resolved_ell(), 6);
}

TEST(Config, CriticalExponent)
{
    EXPECT_DOUBLE_EQ(critical_exponent(1), 3.0);
    EXPECT_DOUBLE_EQ(critical_exponent(2), 3.0);
    EXPECT_DOUBLE_EQ(critical_exponent(3), 2.0);
}

TEST(Simulate, BlowUpManifest)
{
    const fs::path out = scratch("sim_blowup");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate({config("dim1_bump.json"), out}, log), cli::Success);
    const json outcome = json::parse(io::read_file(out / "outcome.json"));
    EXPECT_EQ(outcome["verdict"], "BlowUp");
    EXPECT_GT(outcome["t_max_estimate"].get<double>(), 0.0);
    EXPECT_TRUE(outcome["sign_functional"]["positive"].get<bool>());
    EXPECT_EQ(manifest_of(out)["verdict"], "BlowUp");
    const std::string history = io::read_file(out / "history.csv");
    EXPECT_EQ(history.substr(0, history.find('\n')), "t,sup_u,l2_u,h1_semi_u,l2_v,dt,boundary_activity");
    expect_manifest_complete(out);
}

TEST(Simulate, ZeroDataSurvives)
{
    const fs::path out = scratch("sim_zero");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate({config("dim1_zero.json"), out}, log), cli::Success);
    EXPECT_EQ(json::parse(io::read_file(out / "outcome.json"))["verdict"], "SurvivedHorizon");
}

TEST(Simulate, ConfigErrorExitTwo)
{
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_simulate({config("invalid_p.json"), scratch("sim_bad")}, log), cli::ConfigError);
    EXPECT_EQ(cli::cmd_simulate({config("does_not_exist.json"), scratch("sim_missing")}, log), cli::ConfigError);
}

TEST(Simulate, NegativeDataIsConfigError)
{
    const fs::path dir = scratch("sim_negative");
    const json j = json::parse(R"({"dim": 1, "p": 2, "r_max": 4, "cells": 8,
        "data": {"u0": {"family": "array", "values": [0, -1, -1, -1, -1, -1, -1, -1, 0]}}})");
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_simulate({write_json(dir, j), dir / "out", true}, log), cli::ConfigError);
}

TEST(Simulate, TailReportForSurvivingRun)
{
    const fs::path dir = scratch("sim_tails");
    const json j = {{"dim", 1},
                    {"p", 3.0},
                    {"r_max", 40.0},
                    {"cells", 512},
                    {"data", {{"u0", {{"family", "bump"}, {"amplitude", 0.2}, {"center", 4.0}, {"width", 3.0}}}}},
                    {"controls", {{"t_end", 8.0}, {"dt0", 0.02}}},
                    {"T_ladder", {2.0, 4.0, 8.0}}};
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate({write_json(dir, j), dir / "out"}, log), cli::Success);
    EXPECT_TRUE(fs::exists(dir / "out" / "tails.csv"));
    expect_manifest_complete(dir / "out");
}

TEST(Sweep, Dim1PhaseTable)
{
    const fs::path out = scratch("sweep_dim1");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_sweep({config("sweep_dim1.json"), out, 3}, log), cli::Success);
    std::istringstream table(io::read_file(out / "phase_table.csv"));
    std::string line;
    std::getline(table, line);
    EXPECT_EQ(line, "p,amplitude,verdict,t_max,sign_functional");
    int rows = 0;
    while (std::getline(table, line)) {
        ++rows;
        const double p = std::stod(line.substr(0, line.find(',')));
        if (p <= 3.0) EXPECT_NE(line.find(",BlowUp,"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 5);
    expect_manifest_complete(out);
}

TEST(Sweep, Dim3BothExponentsBlowUp)
{
    const fs::path out = scratch("sweep_dim3");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_sweep({config("sweep_dim3.json"), out, 2}, log), cli::Success);
    const json s = json::parse(io::read_file(out / "sweep_summary.json"));
    bool p15 = false, p2 = false;
    for (const auto& row : s["rows"]) {
        if (row["verdict"] != "BlowUp") continue;
        if (row["p"] == 1.5) p15 = true;
        if (row["p"] == 2.0) p2 = true;
    }
    EXPECT_TRUE(p15);
    EXPECT_TRUE(p2);
}

TEST(Sweep, ParallelMatchesSerial)
{
    const fs::path a = scratch("sweep_serial"), b = scratch("sweep_parallel");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_sweep({config("sweep_dim1.json"), a, 1}, log), cli::Success);
    ASSERT_EQ(cli::cmd_sweep({config("sweep_dim1.json"), b, 4}, log), cli::Success);
    EXPECT_EQ(io::read_file(a / "phase_table.csv"), io::read_file(b / "phase_table.csv"));
}

TEST(Sweep, FailedRowsRecorded)
{
    const fs::path dir = scratch("sweep_partial");
    const json j = {{"base",
                     {{"dim", 1},
                      {"r_max", 20.0},
                      {"cells", 128},
                      {"data", {{"u0", {{"family", "bump"}, {"amplitude", 1.0}, {"center", 4.0}, {"width", 3.0}}}}},
                      {"controls", {{"t_end", 0.5}, {"dt0", 0.01}}}}},
                    {"p_values", {1.5, 2.0}},
                    {"amplitudes", {1.0}}};
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_sweep({write_json(dir, j), dir / "out", 1}, log), cli::Success);

    // Negative amplitude makes the data sign-indefinite, which the setup rejects.
    const cli::SweepRow bad =
        cli::run_sweep_row(parse_run_config(json::parse(R"({"dim": 1, "p": 2, "cells": 64,
            "data": {"u0": {"family": "bump", "amplitude": 1, "center": 4, "width": 3}}})")), 2.0, -1.0);
    EXPECT_EQ(bad.verdict, "Error");
    EXPECT_FALSE(bad.detail.empty());
}

TEST(Weights, CertifiesAllDimensions)
{
    for (int dim : {1, 2, 3, 4}) {
        const fs::path out = scratch("weights_" + std::to_string(dim));
        std::ostringstream log;
        EXPECT_EQ(cli::cmd_weights({dim, dim == 1 ? 0.0 : 1.0, 256, std::nullopt, out}, log), cli::Success) << log.str();
        expect_manifest_complete(out);
    }
}

TEST(Weights, BadArgumentsExitTwo)
{
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_weights({0, 1.0, 64, std::nullopt, scratch("w_bad")}, log), cli::ConfigError);
    EXPECT_EQ(cli::cmd_weights({3, 0.0, 64, std::nullopt, scratch("w_bad2")}, log), cli::ConfigError);
}

TEST(Weights, UnderResolvedFailsCertification)
{
    // Eight cells cannot show the asymptotic residual order near a tiny obstacle.
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_weights({3, 0.01, 8, 10.0, scratch("w_coarse")}, log), cli::CertificationFailure) << log.str();
}

TEST(Scaling, WritesAllOutputs)
{
    const fs::path out = scratch("scaling");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_scaling({config("scaling_n3_p1_5.json"), "8,16,32,64", out}, log), cli::Success);
    const json fit = json::parse(io::read_file(out / "scaling_fit.json"));
    EXPECT_NEAR(fit["fitted_slope"].get<double>(), -2.0, 0.1);
    EXPECT_TRUE(fit["within_tolerance"].get<bool>());
    const std::string csv = io::read_file(out / "scaling.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "T,I1_a,I1_b,I2_a,I2_b,I2_c,I3_a,I3_b,I3_c,sum");
    expect_manifest_complete(out);
}

TEST(Scaling, ShortLadderExitTwo)
{
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_scaling({config("scaling_n3_p1_5.json"), "8,16", scratch("scaling_short")}, log),
              cli::ConfigError);
}

TEST(Binary, ExitCodes)
{
    const std::string cli = SDWAVE_CLI_PATH;
    const fs::path out = scratch("binary");
    auto run = [](const std::string& cmd) {
        const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(run(cli + " simulate --config " + config("dim1_zero.json").string() + " --out " + (out / "a").string()), 0);
    EXPECT_EQ(run(cli + " simulate --config " + config("invalid_p.json").string() + " --out " + (out / "b").string()), 2);
    EXPECT_EQ(run(cli + " scaling --config " + config("scaling_n1_p2.json").string() + " --ladder 8,16 --out " +
                  (out / "c").string()),
              2);
    EXPECT_EQ(run(cli + " bogus"), 2);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "csd_cli/cli.hpp"

using namespace csd;
using namespace csd::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("csd_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    write_text(p, dump_json(j));
    return p;
}

int invoke(const std::string& command, const fs::path& out, std::optional<json> config = std::nullopt,
           bool quick = true, const std::string& sub = "") {
    Invocation inv;
    inv.command = command;
    inv.sub = sub;
    inv.out = out;
    inv.quick = quick;
    if (config) inv.config = write_config(out, *config);
    std::ostringstream log;
    return run(inv, log);
}

int main_with(std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Io, GitBlobHash) {
    EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Io, DoubleFormatRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(x)), x);
    EXPECT_EQ(format_double(NAN), "nan");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Io, CsvQuotingAndWidth) {
    CsvWriter w({"a", "b"});
    w.row({"1,2", "say \"hi\""});
    EXPECT_EQ(w.str(), "a,b\r\n\"1,2\",\"say \"\"hi\"\"\"\r\n");
    EXPECT_EQ(w.rows(), 1u);
    EXPECT_ANY_THROW(w.row({"only one"}));
}

TEST(Io, ArchiveRoundTrip) {
    const fs::path dir = scratch("archive");
    const Grid2D g(8, 2.0);
    SolutionArchive a;
    a.n = 8;
    a.length = 2.0;
    a.dt = 0.1;
    a.t0 = -0.2;
    for (int f = 0; f < 3; ++f) {
        std::array<ScalarField, 5> fr{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
        for (int c = 0; c < 5; ++c)
            for (std::size_t i = 0; i < g.size(); ++i) fr[c].v[i] = cplx(f + 0.1 * c, -double(i));
        a.frames.push_back(fr);
    }
    write_archive(dir / "a.bin", a);
    const SolutionArchive b = read_archive(dir / "a.bin");
    EXPECT_EQ(b.n, 8);
    EXPECT_EQ(b.dt, 0.1);
    EXPECT_EQ(b.t0, -0.2);
    ASSERT_EQ(b.frames.size(), 3u);
    for (int f = 0; f < 3; ++f)
        for (int c = 0; c < 5; ++c) EXPECT_EQ(b.frames[f][c].v, a.frames[f][c].v);
    write_text(dir / "bad.bin", "not an archive");
    EXPECT_ANY_THROW(read_archive(dir / "bad.bin"));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_simulate(json{{"bogus", 1}}, false), ValidationError);
    EXPECT_THROW(parse_simulate(json{{"n", 48}}, false), ValidationError);
    EXPECT_THROW(parse_simulate(json{{"n", "64"}}, false), ValidationError);
    EXPECT_THROW(parse_simulate(json{{"T", 0.5}, {"t_ext", 0.25}}, false), ValidationError);
    EXPECT_THROW(parse_simulate(json{{"mode", "exact"}}, false), ValidationError);
    EXPECT_THROW(parse_simulate(json{{"data", {{"a0", {{40, 0, 1.0, 0.0}}}}}}, false), ValidationError);
    EXPECT_THROW(parse_verify(json{{"fault", "other"}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_verify(json{{"dirac_samples", -5}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_illposed("f2", json{{"eps", 1.0}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_illposed("f2", json{{"lambdas", {1e5}}, {"ks", {1, 2, 3, 4}}}, false, std::nullopt),
                 ValidationError);
    EXPECT_THROW(parse_illposed("f2", json{{"ks", {1, 1, 2, 3}}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_illposed("quartic", json::object(), false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_bilinear(json{{"N", {3}}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_bilinear(json{{"estimate", "all"}}, false, std::nullopt), ValidationError);
    EXPECT_THROW(parse_norm(json{{"q", "l2"}}), ValidationError);
}

TEST(Config, DefaultsQuickAndSeedOverride) {
    const VerifyConfig v = parse_verify(json{{"seed", 5}}, true, 9);
    EXPECT_EQ(v.seed, 9u);
    EXPECT_LT(v.dirac_samples, VerifyConfig{}.dirac_samples);
    const IllposedConfig f = parse_illposed("f2", json::object(), false, std::nullopt);
    EXPECT_EQ(f.s_values, (std::vector<double>{-0.5, 0.0}));
    const SimulateConfig s = parse_simulate(json{{"n", 128}}, true);
    EXPECT_LE(s.n, 32);
    // to_json feeds back into the parser unchanged
    const BilinearConfig b = parse_bilinear(json{{"N", {1, 2}}}, false, std::nullopt);
    EXPECT_EQ(to_json(parse_bilinear(to_json(b), false, std::nullopt)), to_json(b));
}

TEST(Config, BuildDataMakesRealPotentials) {
    json j = {{"n", 16}, {"data", {{"a1", {{1, 2, 0.5, 0.25}}}, {"psi_up", {{0, 1, 1.0, 0.0}}}}}};
    const SimulateConfig c = parse_simulate(j, false);
    const CauchyData d = build_data(c);
    EXPECT_NO_THROW(d.validate());
    const ScalarField a1 = to_fourier(d.a1);
    const double L2 = c.length * c.length;
    EXPECT_LT(std::abs(a1.at(1, 2) - L2 * cplx(0.5, 0.25)), 1e-10);
    EXPECT_LT(std::abs(a1.at(15, 14) - L2 * cplx(0.5, -0.25)), 1e-10);
}

TEST(Commands, ParseErrorsExitOne) {
    EXPECT_EQ(main_with({"csd"}), Exit::validation);
    EXPECT_EQ(main_with({"csd", "illposed", "quartic"}), Exit::validation);
    EXPECT_EQ(main_with({"csd", "verify", "--config", "/nonexistent.json"}), Exit::validation);
    EXPECT_EQ(main_with({"csd", "simulate", "--seed", "3"}), Exit::validation);
}

TEST(Commands, InvalidConfigExitsOne) {
    const fs::path dir = scratch("invalid");
    EXPECT_EQ(invoke("bilinear", dir, json{{"N", {3}}}), Exit::validation);
    write_text(dir / "broken.json", "{ not json");
    Invocation inv;
    inv.command = "verify";
    inv.config = dir / "broken.json";
    inv.out = dir;
    std::ostringstream log;
    EXPECT_EQ(run(inv, log), Exit::validation);
}

TEST(Commands, VerifyPassesAndFaultInjectionIsCaught) {
    const fs::path ok = scratch("verify_ok"), bad = scratch("verify_fault");
    EXPECT_EQ(invoke("verify", ok), Exit::ok);
    const json r = json::parse(read_text(ok / "verify_report.json"));
    EXPECT_EQ(r["violations"], 0);
    EXPECT_EQ(r["schema_version"], kSchemaVersion);
    EXPECT_EQ(invoke("verify", bad, json{{"fault", "flip_riesz_sign"}}), Exit::violation);
    const json f = json::parse(read_text(bad / "verify_report.json"));
    EXPECT_GT(f["violations"].get<long>(), 0);
    EXPECT_FALSE(f["counterexamples"].empty());
}

TEST(Commands, VerifyIsDeterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(invoke("verify", a), Exit::ok);
    ASSERT_EQ(invoke("verify", b), Exit::ok);
    // only the config path differs between the two runs
    json ja = json::parse(read_text(a / "verify_report.json")), jb = json::parse(read_text(b / "verify_report.json"));
    EXPECT_EQ(ja, jb);
}

TEST(Commands, ZeroDataSimulateAndNorm) {
    const fs::path dir = scratch("zero");
    ASSERT_EQ(invoke("simulate", dir, json{{"n", 16}, {"t_ext", 0.5}}), Exit::ok);
    const json r = json::parse(read_text(dir / "report.json"));
    EXPECT_TRUE(r["results"]["converged"].get<bool>());
    EXPECT_EQ(r["results"]["charge_initial"], 0.0);
    EXPECT_TRUE(fs::exists(dir / "charge.csv"));
    EXPECT_TRUE(fs::exists(dir / "solution.bin"));
    EXPECT_EQ(invoke("norm", dir, json{{"archive", "solution.bin"}}, false), Exit::ok);
    const json n = json::parse(read_text(dir / "norm_report.json"));
    EXPECT_EQ(n["results"]["l2_t0"], 0.0);
}

TEST(Commands, EmptyBilinearRangeGivesEmptyTable) {
    const fs::path dir = scratch("empty");
    ASSERT_EQ(invoke("bilinear", dir, json{{"N", json::array()}, {"estimate", "product"}}), Exit::ok);
    EXPECT_EQ(read_text(dir / "bilinear_product.csv"), "N0,N1,N2,L0,L1,L2,s0,s1,s2,measured,C1,C2,C3,min,ratio\r\n");
}

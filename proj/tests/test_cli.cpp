#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "logsymp/cli/pipeline.hpp"
#include "logsymp/cli/run.hpp"
#include "test_support.hpp"

using namespace logsymp;
using namespace logsymp::cli;
using testing_support::error_of;

namespace {

const std::string kScenarios = LOGSYMP_SCENARIO_DIR;

Scenario scenario_file(const std::string& name) { return load_scenario(kScenarios + "/" + name); }

// Runs the command-line binary, returning its exit status.
int run_binary(const std::string& args) {
  const std::string cmd = std::string(LOGSYMP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Scenario, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(error_of([] { parse_scenario(R"({"command": "catalog", "colour": 1})"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"command": )"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"tolerances": {"wobble": 1e-3}})"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"tolerances": {"jacobi": -1}})"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"steps": "many"})"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"example3": {"kind": "four-circles"}})"); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([] { parse_scenario(R"({"form": {"degree": 2, "coefficients": {}, "extra": 0}})"); }),
            ErrorKind::Parse);
}

TEST(Scenario, CoefficientKeys) {
  const auto s2 = catalog_lookup("s2");
  EXPECT_EQ(parse_mask("01", s2), 3u);
  EXPECT_EQ(parse_mask("z,th", s2), 3u);
  EXPECT_EQ(error_of([&] { parse_mask("z,phi", s2); }), ErrorKind::Parse);
  EXPECT_EQ(error_of([&] { parse_mask("z,z", s2); }), ErrorKind::Parse);
  // "th,z" is the same basis element with the opposite sign
  const BForm a = build_form({2, Frame::B, {{"th,z", "2"}}}, s2);
  EXPECT_DOUBLE_EQ(a[3u].value({0.3, 1.0}), -2.0);
  const Scenario bad = parse_scenario(R"({"form": {"degree": 2, "coefficients": {"z,th": "sin("}}})");
  EXPECT_EQ(error_of([&] { run("nondegenerate", bad); }), ErrorKind::Parse);
}

TEST(Scenario, DigestIgnoresKeyOrder) {
  const Scenario a = parse_scenario(R"({"command": "deform", "epsilon": [0.1], "delta": [0.05]})");
  const Scenario b = parse_scenario(R"({"delta": [0.05], "epsilon": [0.1], "command": "deform"})");
  EXPECT_EQ(digest_of(canonical(a)), digest_of(canonical(b)));
  const Scenario c = parse_scenario(R"({"command": "deform", "epsilon": [0.1], "delta": [0.06]})");
  EXPECT_NE(digest_of(canonical(a)), digest_of(canonical(c)));
}

TEST(Run, RejectsUnknownCommandsAndMismatchedScenarios) {
  EXPECT_EQ(error_of([] { run("frobnicate", Scenario{}); }), ErrorKind::Parse);
  Scenario s;
  s.command = "catalog";
  EXPECT_EQ(error_of([&] { run("deform", s); }), ErrorKind::Parse);
  s.manifold = "klein";
  EXPECT_EQ(error_of([&] { run("catalog", s); }), ErrorKind::Catalog);
  EXPECT_EQ(command_names().size(), 18u);
}

TEST(Run, RegularizedVolumeOfDlogForm) {
  const Report r = run("regvol", scenario_file("regvol_dlog.json"));
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.results["volume"].get<double>(), 0.0, 1e-6);
  ASSERT_EQ(r.csv.count("regvol.csv"), 1u);
  EXPECT_EQ(r.csv.at("regvol.csv").rfind("epsilon,", 0), 0u);
}

TEST(Run, NormalizeShiftedEquator) {
  const Report r = run("normalize", scenario_file("normalize_shifted.json"));
  EXPECT_TRUE(r.passed()) << r.text();
  const auto& comp = r.results["components"][0];
  EXPECT_NEAR(comp["g_min"].get<double>(), 0.1, 1e-8);
  EXPECT_NEAR(comp["g_max"].get<double>(), 0.1, 1e-8);
  EXPECT_EQ(r.csv.count("fibers.csv"), 1u);
}

TEST(Run, DeformReproducesExampleOne) {
  const Report r = run("deform", scenario_file("deform_example1.json"));
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_NEAR(r.results["classified"]["epsilon"][0].get<double>(), 0.1, 1e-10);
  EXPECT_NEAR(r.results["classified"]["delta"][0].get<double>(), 0.05, 1e-10);
}

TEST(Run, ExpectationsAreChecked) {
  Scenario s = scenario_file("nambu_refused.json");
  EXPECT_TRUE(run("nambu", s).passed());
  s.expect_numbers["volume_gap"] = 1.0;
  const Report r = run("nambu", s);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failing(), std::vector<std::string>{"expect.volume_gap"});
  // an expectation replaces the built-in check on the same result
  EXPECT_TRUE(run("nondegenerate", scenario_file("nondegenerate_degenerate.json")).passed());
}

TEST(Run, LibraryErrorsAreReported) {
  Scenario s;
  s.epsilon = {2.0};
  const Report r = run("deform", s);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.error.rfind(to_string(ErrorKind::Degeneracy), 0), 0u) << r.error;
}

TEST(Run, ToleranceOverride) {
  Scenario s = scenario_file("jacobi_violation.json");
  EXPECT_FALSE(run("check-jacobi", s).passed());
  s.tolerances[primary_tolerance("check-jacobi")] = 1.0;
  EXPECT_TRUE(run("check-jacobi", s).passed());
}

TEST(Run, ReportsAreDeterministic) {
  const Scenario s = scenario_file("normalize_shifted.json");
  const Report a = run("normalize", s), b = run("normalize", s);
  EXPECT_EQ(a.text(), b.text());
  EXPECT_EQ(a.json().dump(), b.json().dump());
  EXPECT_EQ(a.csv, b.csv);
}

TEST(Pipeline, BaseStructureGivesZeroParameters) {
  const Report r = run("pipeline", scenario_file("pipeline_identity.json"));
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_NEAR(r.results["parameters"]["epsilon"][0].get<double>(), 0.0, 1e-10);
  EXPECT_NEAR(r.results["parameters"]["delta"][0].get<double>(), 0.0, 1e-10);
  EXPECT_LT(r.results["pullback_residual"].get<double>(), 1e-10);
  EXPECT_EQ(r.results["z_drift"].get<double>(), 0.0);
}

TEST(Pipeline, PlateauHaltsAtLocusStage) {
  const Report r = run("pipeline", scenario_file("pipeline_plateau.json"));
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.results["stage"], "locus");
  EXPECT_EQ(r.results["classification"], "non-transverse");
  EXPECT_EQ(r.error.rfind(to_string(ErrorKind::Inadmissible), 0), 0u) << r.error;
}

TEST(Pipeline, NonPoissonInputHaltsAtJacobiStage) {
  Scenario s;
  s.manifold = "s2xt2";
  s.perturbation = BivectorInput{Frame::Coordinate, {{"th1,th2", "0.1*cos(th)"}}};
  const auto base = LogSymplecticStructure::catalog(catalog_lookup("s2xt2"));
  try {
    pipeline(scenario_bivector(s, base.spec), base);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "jacobi");
    EXPECT_EQ(e.kind(), ErrorKind::InvalidStructure);
  }
}

TEST(Pipeline, RandomCasesAreReproducible) {
  std::mt19937 a(7), b(7);
  for (int i = 0; i < 5; ++i) {
    const RoundTripCase x = random_round_trip(a), y = random_round_trip(b);
    EXPECT_EQ(x.exact, y.exact);
    EXPECT_EQ(x.shift, y.shift);
    EXPECT_EQ(x.params.epsilon, y.params.epsilon);
    EXPECT_LE(std::fabs(x.params.epsilon[0]), 0.2);
  }
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_binary("catalog"), 0);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("catalog --scenario " + write_temp("logsymp_bad.json", R"({"colour": 1})")), 2);
  EXPECT_EQ(run_binary("catalog --manifold klein"), 2);
  EXPECT_EQ(run_binary("check-jacobi --scenario " + kScenarios + "/jacobi_violation.json"), 1);
  EXPECT_EQ(run_binary("check-jacobi --tol 1 --scenario " + kScenarios + "/jacobi_violation.json"), 0);
  EXPECT_EQ(run_binary("deform --scenario " + write_temp("logsymp_big.json", R"({"epsilon": [2.0]})")), 1);
}

TEST(Binary, WritesReports) {
  const auto dir = std::filesystem::temp_directory_path() / "logsymp_cli_out";
  std::filesystem::remove_all(dir);
  ASSERT_EQ(run_binary("regvol --out " + dir.string() + " --scenario " + kScenarios + "/regvol_dlog.json"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "regvol.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "regvol.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "regvol.json"));
  EXPECT_EQ(j["pass"], true);
  const std::string first = slurp(dir / "regvol.txt");
  ASSERT_EQ(run_binary("regvol --out " + dir.string() + " --scenario " + kScenarios + "/regvol_dlog.json"), 0);
  EXPECT_EQ(slurp(dir / "regvol.txt"), first);
}

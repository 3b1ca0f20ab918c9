#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gridh2/case_bank.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2_cli/commands.hpp"
#include "gridh2_cli/json_io.hpp"
#include "gridh2_cli/svg.hpp"

namespace gridh2::cli {
namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) { return std::string(GRIDH2_FIXTURE_DIR) + "/" + name; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Captured {
  int code = 0;
  std::string out;
  std::string err;
};

template <typename Fn>
Captured capture(Fn&& fn) {
  std::ostringstream out, err;
  Captured c;
  c.code = fn(Streams{out, err});
  c.out = out.str();
  c.err = err.str();
  return c;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("gridh2_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

GlobalOptions json_mode() {
  GlobalOptions g;
  g.json = true;
  return g;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

TEST(CliAnalyze, TriangleJson) {
  const Captured c = capture([](Streams io) { return run_analyze(json_mode(), fixture("triangle.json"), io); });
  ASSERT_EQ(c.code, kExitOk) << c.err;
  const Json doc = Json::parse(c.out);
  EXPECT_NEAR(doc["h2_squared"].get<double>(), 12.0, 1e-10);
  EXPECT_NEAR(doc["h2_norm"].get<double>(), std::sqrt(12.0), 1e-10);
  EXPECT_EQ(doc["nodes"].get<int>(), 3);
  EXPECT_TRUE(doc["bounds"]["lower_holds"].get<bool>());
  EXPECT_TRUE(doc["bounds"]["upper_holds"].get<bool>());
  EXPECT_EQ(doc["mode_centrality"].size(), 3u);
  EXPECT_TRUE(c.err.empty());
}

TEST(CliAnalyze, TextOutputMentionsNorm) {
  const Captured c = capture([](Streams io) { return run_analyze({}, fixture("triangle.json"), io); });
  ASSERT_EQ(c.code, kExitOk);
  EXPECT_NE(c.out.find("12"), std::string::npos);
}

TEST(CliAnalyze, MalformedJsonReportsLine) {
  const Captured c = capture([](Streams io) { return run_analyze(json_mode(), fixture("malformed.json"), io); });
  EXPECT_EQ(c.code, kExitInvalid);
  EXPECT_TRUE(c.out.empty());
  EXPECT_NE(c.err.find("line 5"), std::string::npos) << c.err;
}

TEST(CliAnalyze, SchemaErrorsNameTheField) {
  const Captured c =
      capture([](Streams io) { return run_analyze(json_mode(), fixture("negative_inertia.json"), io); });
  EXPECT_EQ(c.code, kExitInvalid);
  EXPECT_TRUE(c.out.empty());
  EXPECT_NE(c.err.find("inertia"), std::string::npos) << c.err;
}

TEST(CliAnalyze, DisconnectedNetwork) {
  const Captured c = capture([](Streams io) { return run_analyze(json_mode(), fixture("disconnected.json"), io); });
  EXPECT_EQ(c.code, kExitDisconnected);
  EXPECT_TRUE(c.out.empty());
  EXPECT_NE(c.err.find("components"), std::string::npos) << c.err;
}

TEST(CliAnalyze, MissingFile) {
  const Captured c = capture([](Streams io) { return run_analyze({}, fixture("nope.json"), io); });
  EXPECT_EQ(c.code, kExitInvalid);
}

TEST(CliAnalyze, KundurBoundsFlagsReported) {
  const Captured c = capture([](Streams io) { return run_analyze(json_mode(), "case:kundur-like", io); });
  ASSERT_EQ(c.code, kExitOk) << c.err;
  const Json doc = Json::parse(c.out);
  const Json& b = doc["bounds"];
  ASSERT_TRUE(b.contains("lower_holds"));
  ASSERT_TRUE(b.contains("upper_holds"));
  const double h2 = doc["h2_squared"].get<double>();
  EXPECT_EQ(b["lower_holds"].get<bool>(), b["lower"].get<double>() <= h2);
  EXPECT_EQ(b["upper_holds"].get<bool>(), h2 <= b["upper"].get<double>());
}

TEST(CliAnalyze, WritesAnalysisFile) {
  TempDir dir;
  GlobalOptions g;
  g.out_dir = dir.path().string();
  g.quiet = true;
  const Captured c = capture([&](Streams io) { return run_analyze(g, "case:triangle", io); });
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_TRUE(c.out.empty());
  const Json doc = Json::parse(slurp(dir.path() / "analysis.json"));
  EXPECT_NEAR(doc["h2_squared"].get<double>(), 12.0, 1e-10);
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

SimulateOptions quick_simulation(const std::string& network) {
  SimulateOptions o;
  o.network = network;
  o.dt = 0.01;
  o.horizon = 25.0;
  o.burn_in = 5.0;
  o.trials = 60;
  o.record_trials = 2;
  o.record_stride = 50;
  return o;
}

TEST(CliSimulate, WritesArtifacts) {
  TempDir dir;
  GlobalOptions g;
  g.out_dir = dir.path().string();
  g.seed = 5;
  SimulateOptions o = quick_simulation("case:triangle");
  o.plot = true;
  const Captured c = capture([&](Streams io) { return run_simulate(g, o, io); });
  ASSERT_EQ(c.code, kExitOk) << c.err;
  const std::string csv = slurp(dir.path() / "trajectories.csv");
  EXPECT_EQ(csv.rfind("time,trial,node,theta,omega\n", 0), 0u);
  const Json summary = Json::parse(slurp(dir.path() / "summary.json"));
  EXPECT_GT(summary["empirical_h2"].get<double>(), 0.0);
  EXPECT_NEAR(summary["analytic_h2"].get<double>(), 12.0, 1e-10);
  EXPECT_EQ(summary["seed"].get<std::uint64_t>(), 5u);
  const std::string svg = slurp(dir.path() / "frequency.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(CliSimulate, PlotNeedsOutputDirectory) {
  SimulateOptions o = quick_simulation("case:triangle");
  o.plot = true;
  const Captured c = capture([&](Streams io) { return run_simulate({}, o, io); });
  EXPECT_EQ(c.code, kExitInvalid);
}

TEST(CliSimulate, UnknownSchemeRejected) {
  SimulateOptions o = quick_simulation("case:triangle");
  o.scheme = "rk4";
  const Captured c = capture([&](Streams io) { return run_simulate(json_mode(), o, io); });
  EXPECT_EQ(c.code, kExitInvalid);
  EXPECT_TRUE(c.out.empty());
}

TEST(CliSimulate, UnstableStepExitCode) {
  SimulateOptions o = quick_simulation("case:triangle");
  o.dt = 1.5;
  o.horizon = 300.0;
  o.burn_in = 10.0;
  const Captured c = capture([&](Streams io) { return run_simulate(json_mode(), o, io); });
  EXPECT_EQ(c.code, kExitUnstableStep) << c.err;
}

TEST(CliSimulate, ByteIdenticalAcrossThreadCounts) {
  TempDir a, b;
  GlobalOptions g;
  g.seed = 17;
  g.quiet = true;
  SimulateOptions o = quick_simulation("case:triangle");
  g.out_dir = a.path().string();
  o.threads = 1;
  ASSERT_EQ(capture([&](Streams io) { return run_simulate(g, o, io); }).code, kExitOk);
  g.out_dir = b.path().string();
  o.threads = 3;
  ASSERT_EQ(capture([&](Streams io) { return run_simulate(g, o, io); }).code, kExitOk);
  for (const char* name : {"trajectories.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a.path() / name), slurp(b.path() / name)) << name;
  }
}

TEST(CliSimulate, InitialConditionRoundTripsThroughExport) {
  TempDir dir;
  GlobalOptions g;
  g.out_dir = dir.path().string();
  g.quiet = true;
  ASSERT_EQ(capture([&](Streams io) { return run_cases_export(g, "kundur-like", io); }).code, kExitOk);
  const NetworkDocument doc = load_network((dir.path() / "kundur-like.network.json").string());
  const CaseBankEntry& c = find_case("kundur-like");
  ASSERT_TRUE(doc.initial_condition.has_value());
  EXPECT_EQ(doc.initial_condition->mean, c.initial_condition.mean);
  EXPECT_EQ(doc.initial_condition->cov_factor, c.initial_condition.cov_factor);
  EXPECT_EQ(doc.network.inertia(), c.network.inertia());
  EXPECT_EQ(doc.network.damping(), c.network.damping());
  EXPECT_EQ(doc.network.susceptances(), c.network.susceptances());
  EXPECT_EQ(doc.network.angle_star(), c.network.angle_star());
  EXPECT_EQ(h2_norm(doc.network).h2_squared, h2_norm(c.network).h2_squared);
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

Json optimize_json(const std::string& problem, const std::string& scenario = "") {
  OptimizeOptions o;
  o.problem = problem;
  o.scenario = scenario;
  const Captured c = capture([&](Streams io) { return run_optimize(json_mode(), o, io); });
  EXPECT_EQ(c.code, kExitOk) << c.err;
  return Json::parse(c.out);
}

TEST(CliOptimize, AssignmentFromFile) {
  const Json doc = optimize_json(fixture("assignment_four.json"));
  EXPECT_EQ(doc["scenario"], "assignment");
  EXPECT_NEAR(doc["solution"]["objective"].get<double>(), 11.0, 1e-9);
  EXPECT_TRUE(doc["feasible"].get<bool>());
}

TEST(CliOptimize, SusceptanceFromFile) {
  const Json doc = optimize_json(fixture("susceptance_triangle.json"));
  EXPECT_NEAR(doc["solution"]["objective"].get<double>(), 12.0, 1e-6);
}

TEST(CliOptimize, CasePresets) {
  const Json pinned = optimize_json("case:two-node", "susceptance");
  EXPECT_NEAR(pinned["solution"]["susceptances"][0].get<double>(), 1.5, 1e-12);
  const Json minmax = optimize_json("case:two-node", "minmax");
  EXPECT_NEAR(minmax["solution"]["objective"].get<double>(), 6.0, 1e-9);
  const Json alloc = optimize_json("case:kundur-like", "allocation");
  EXPECT_LT(alloc["solution"]["objective"].get<double>(), alloc["uniform"]["objective"].get<double>());
  EXPECT_GT(alloc["uniform"]["improvement"].get<double>(), 0.10);
}

TEST(CliOptimize, ScenarioMismatchRejected) {
  OptimizeOptions o;
  o.problem = fixture("assignment_four.json");
  o.scenario = "minmax";
  EXPECT_EQ(capture([&](Streams io) { return run_optimize(json_mode(), o, io); }).code, kExitInvalid);
  o.problem = "case:triangle";
  o.scenario = "allocation";  // no preset
  EXPECT_EQ(capture([&](Streams io) { return run_optimize(json_mode(), o, io); }).code, kExitInvalid);
}

TEST(CliOptimize, WritesSolutionAndPlot) {
  TempDir dir;
  GlobalOptions g;
  g.out_dir = dir.path().string();
  g.quiet = true;
  OptimizeOptions o;
  o.problem = "case:symmetric-two-converter";
  o.scenario = "allocation";
  o.plot = true;
  const Captured c = capture([&](Streams io) { return run_optimize(g, o, io); });
  ASSERT_EQ(c.code, kExitOk) << c.err;
  const Json sol = Json::parse(slurp(dir.path() / "solution_allocation.json"));
  EXPECT_NEAR(sol["solution"]["inertia"][0].get<double>(), 60.0, 1e-4);
  const std::string svg = slurp(dir.path() / "convergence_allocation.svg");
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(CliOptimize, SeedChangesOnlySeededStarts) {
  OptimizeOptions o;
  o.problem = "case:kundur-like";
  o.scenario = "allocation";
  GlobalOptions g = json_mode();
  g.seed = 1;
  const Json a = Json::parse(capture([&](Streams io) { return run_optimize(g, o, io); }).out);
  g.seed = 2;
  const Json b = Json::parse(capture([&](Streams io) { return run_optimize(g, o, io); }).out);
  EXPECT_EQ(a["solution"]["starts"][0], b["solution"]["starts"][0]);
  EXPECT_NE(a["solution"]["starts"][1], b["solution"]["starts"][1]);
}

// ---------------------------------------------------------------------------
// validate and cases
// ---------------------------------------------------------------------------

TEST(CliValidate, FamiliesPass) {
  for (const char* family : {"bounds", "oracle", "gradients"}) {
    ValidateOptions o;
    o.family = family;
    o.instances = 10;
    const Captured c = capture([&](Streams io) { return run_validate(json_mode(), o, io); });
    EXPECT_EQ(c.code, kExitOk) << family << ": " << c.err;
    EXPECT_NO_THROW(Json::parse(c.out));
  }
  ValidateOptions bad;
  bad.family = "nonsense";
  EXPECT_EQ(capture([&](Streams io) { return run_validate({}, bad, io); }).code, kExitInvalid);
}

TEST(CliCases, ListAndShow) {
  const Captured list = capture([](Streams io) { return run_cases_list(json_mode(), io); });
  ASSERT_EQ(list.code, kExitOk);
  const Json doc = Json::parse(list.out);
  EXPECT_EQ(doc.size(), case_bank().size());
  const Captured show = capture([](Streams io) { return run_cases_show({}, "kundur-like", io); });
  EXPECT_EQ(show.code, kExitOk);
  EXPECT_NE(show.out.find("G1"), std::string::npos);
  EXPECT_EQ(capture([](Streams io) { return run_cases_show({}, "missing", io); }).code, kExitInvalid);
}

TEST(CliCases, ExportedScenariosReload) {
  TempDir dir;
  GlobalOptions g;
  g.out_dir = dir.path().string();
  g.quiet = true;
  for (const CaseBankEntry& c : case_bank()) {
    ASSERT_EQ(capture([&](Streams io) { return run_cases_export(g, c.name, io); }).code, kExitOk);
  }
  std::size_t scenarios = 0;
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    const std::string name = entry.path().filename().string();
    if (name.find(".network.json") != std::string::npos) continue;
    OptimizeOptions o;
    o.problem = entry.path().string();
    const Captured c = capture([&](Streams io) { return run_optimize(json_mode(), o, io); });
    EXPECT_EQ(c.code, kExitOk) << name << ": " << c.err;
    ++scenarios;
  }
  EXPECT_GE(scenarios, 6u);
}

// ---------------------------------------------------------------------------
// Output formats and the binary itself
// ---------------------------------------------------------------------------

TEST(CliSvg, EscapesAndCloses) {
  EXPECT_EQ(xml_escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
  PlotSpec spec;
  spec.title = "x < y";
  Series s;
  s.label = "trace & co";
  s.color = "#1f77b4";
  s.x = {0.0, 1.0, 2.0};
  s.y = {1.0, 0.5, 0.25};
  const std::string svg = line_plot_svg(spec, {s});
  EXPECT_NE(svg.find("x &lt; y"), std::string::npos);
  EXPECT_EQ(svg.find("x < y"), std::string::npos);
  // Balanced <svg> element.
  EXPECT_EQ(svg.find("<svg"), svg.rfind("<svg"));
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

int run_binary(const std::string& args, std::string* stdout_text = nullptr) {
  const fs::path out = fs::temp_directory_path() / ("gridh2_bin_" + std::to_string(::getpid()));
  const std::string cmd = std::string(GRIDH2_TOOL_PATH) + " " + args + " >" + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (stdout_text) *stdout_text = slurp(out);
  fs::remove(out);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ExitCodesAndSingleJsonDocument) {
  std::string text;
  EXPECT_EQ(run_binary("--json analyze " + fixture("triangle.json"), &text), kExitOk);
  EXPECT_NO_THROW(Json::parse(text));  // exactly one document, nothing else
  EXPECT_EQ(run_binary("--json analyze " + fixture("malformed.json"), &text), kExitInvalid);
  EXPECT_TRUE(text.empty());
  EXPECT_EQ(run_binary("analyze " + fixture("disconnected.json")), kExitDisconnected);
  EXPECT_EQ(run_binary("analyze --no-such-flag x"), kExitInvalid);
  EXPECT_EQ(run_binary("--version", &text), kExitOk);
  EXPECT_FALSE(text.empty());
}

}  // namespace
}  // namespace gridh2::cli

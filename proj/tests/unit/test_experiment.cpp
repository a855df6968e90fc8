#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "radwave/errors.hpp"
#include "radwave/experiment/commands.hpp"

using namespace radwave;
using namespace radwave::experiment;
namespace fs = std::filesystem;

namespace {

Json base_doc() {
  return Json::parse(R"({
    "name": "unit",
    "params": {"p": 3},
    "grid": {"dr": 0.015625, "r_max": 24, "t_end": 8},
    "profile": {
      "u0": {"kind": "gaussian_bump", "amplitude": 1, "center": 5, "width": 1},
      "u1": {"kind": "zero"}
    },
    "probes": {
      "traces": [{"kind": "outgoing", "label": 0}],
      "morawetz_radii": [2],
      "regions": [{"type": "triangle", "t0": 0, "r0": 4}]
    },
    "output": {"directory": "unused", "stride": 32},
    "convergence": {"levels": [0.0625, 0.03125, 0.015625]}
  })");
}

Json zero_doc() {
  Json d = base_doc();
  d["profile"]["u0"] = Json{{"kind", "zero"}};
  return d;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("radwave_unit_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string expect_config_error(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError";
  return {};
}

CommandOptions options_in(const fs::path& dir, bool metadata = false) {
  CommandOptions o;
  o.out_dir = dir.string();
  o.metadata = metadata;
  return o;
}

}  // namespace

TEST(Config, ParsesBaseDocument) {
  const ScenarioConfig c = parse_config(base_doc());
  EXPECT_EQ(c.name, "unit");
  EXPECT_DOUBLE_EQ(c.params.p, 3.0);
  EXPECT_EQ(c.grid.n_r, 1536u);
  EXPECT_EQ(c.regions.size(), 1u);
  EXPECT_EQ(c.regions.front().type, "triangle");
  EXPECT_DOUBLE_EQ(scattering_horizon(c), 8.0);
  EXPECT_EQ(exterior_times(c), (std::vector<double>{2.0, 4.0, 8.0}));
}

TEST(Config, UnknownKeyNamesItsPath) {
  Json d = base_doc();
  d["grid"]["dx"] = 1;
  EXPECT_NE(expect_config_error(d).find("grid.dx"), std::string::npos);
  d = base_doc();
  d["extra"] = true;
  EXPECT_NE(expect_config_error(d).find("extra"), std::string::npos);
}

TEST(Config, FieldErrorsNameTheField) {
  Json d = base_doc();
  d["grid"]["dr"] = "fine";
  EXPECT_NE(expect_config_error(d).find("grid.dr"), std::string::npos);
  d = base_doc();
  d["profile"]["u0"]["kind"] = "tophat";
  EXPECT_FALSE(expect_config_error(d).empty());
  d = base_doc();
  d["params"]["p"] = 5;
  EXPECT_FALSE(expect_config_error(d).empty());
  d = base_doc();
  d["output"]["formats"] = Json::array({"xml"});
  EXPECT_NE(expect_config_error(d).find("output.formats"), std::string::npos);
}

TEST(Config, SupportGuardViolationRejected) {
  Json d = base_doc();
  d["grid"]["t_end"] = 16;
  EXPECT_FALSE(expect_config_error(d).empty());
}

TEST(Config, OffLatticeProbesRejected) {
  Json d = base_doc();
  d["probes"]["regions"] = Json::array({Json{{"type", "triangle"}, {"t0", 0.01}, {"r0", 4}}});
  EXPECT_NE(expect_config_error(d).find("probes.regions"), std::string::npos);
  d = base_doc();
  d["probes"]["morawetz_radii"] = Json::array({2.03});
  EXPECT_NE(expect_config_error(d).find("probes.morawetz_radii"), std::string::npos);
  d = base_doc();
  d["probes"]["traces"] = Json::array({Json{{"kind", "outgoing"}, {"label", 0.01}}});
  EXPECT_FALSE(expect_config_error(d).empty());
}

TEST(Config, WeightExponentAtOrBelowCriticalRejected) {
  Json d = base_doc();
  d["probes"]["theorem2"] = Json::array({Json{{"R", 4}, {"beta", 0.45}, {"kappa", 0.5}}});
  EXPECT_NE(expect_config_error(d).find("theorem2"), std::string::npos);
  d["probes"]["theorem2"] = Json::array({Json{{"R", 4}, {"beta", 0.45}, {"kappa", 0.6}}});
  EXPECT_NO_THROW(parse_config(d));
}

TEST(Config, ConvergenceNeedsThreeHalvingLevels) {
  Json d = base_doc();
  d["convergence"]["levels"] = Json::array({0.125, 0.0625});
  EXPECT_NE(expect_config_error(d).find("convergence.levels"), std::string::npos);
  d["convergence"]["levels"] = Json::array({0.25, 0.125, 0.03125});
  EXPECT_NE(expect_config_error(d).find("convergence.levels"), std::string::npos);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/radwave.json"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(Report, VerdictHelpersAndJson) {
  const Verdict a = verdict_le("x", 1.0, 2.0);
  const Verdict b = verdict_ge("y", 1.0, 2.0, "closed-form");
  EXPECT_TRUE(a.passed);
  EXPECT_FALSE(b.passed);
  const Json j = to_json(b);
  EXPECT_EQ(j["name"], "y");
  EXPECT_EQ(j["comparison"], ">=");
  EXPECT_EQ(j["provenance"], "closed-form");
  EXPECT_EQ(j["passed"], false);
  CommandReport r;
  r.verdicts = {a, b};
  EXPECT_FALSE(r.all_passed());
}

TEST(Report, CsvHeaderAndFullPrecision) {
  CsvTable csv({"t", "value"});
  csv.add_row({0.1, 1.0 / 3.0});
  EXPECT_EQ(csv.str(), "t,value\n0.10000000000000001,0.33333333333333331\n");
  EXPECT_THROW(csv.add_row({1.0}), std::logic_error);
}

TEST(Report, AtomicWriteLeavesNoTemporary) {
  const fs::path dir = temp_dir("atomic");
  write_atomic(dir / "a.txt", "first");
  write_atomic(dir / "a.txt", "second");
  EXPECT_EQ(slurp(dir / "a.txt"), "second");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  write_atomic(dir / "nested" / "b.txt", "x");
  EXPECT_EQ(slurp(dir / "nested" / "b.txt"), "x");
}

TEST(Commands, ZeroProfileSimulateIsAllZero) {
  const fs::path dir = temp_dir("zero_sim");
  const CommandOutcome o = cmd_simulate(parse_config(zero_doc()), options_in(dir));
  EXPECT_EQ(o.exit_code, 0);
  EXPECT_TRUE(o.report.all_passed());
  const Json& s = o.report.results["series"];
  ASSERT_FALSE(s["energy"].empty());
  for (const char* key : {"energy", "e_minus", "e_plus"}) {
    for (const auto& v : s[key]) EXPECT_EQ(v.get<double>(), 0.0);
  }
  for (const char* f : {"snapshots.csv", "origin.csv", "energy.csv", "simulate.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "energy.csv").substr(0, 23), "t,energy,e_minus,e_plus");
}

TEST(Commands, AllCommandsPassOnZeroProfile) {
  const fs::path dir = temp_dir("zero_all");
  const ScenarioConfig c = parse_config(zero_doc());
  for (auto* fn : {cmd_simulate, cmd_verify_flux, cmd_verify_morawetz, cmd_scattering, cmd_convergence}) {
    const CommandOutcome o = fn(c, options_in(dir));
    EXPECT_EQ(o.exit_code, 0) << o.report.command;
  }
}

TEST(Commands, ReportsAreDeterministicWithoutMetadata) {
  const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
  const ScenarioConfig c = parse_config(base_doc());
  CommandOptions oa = options_in(a), ob = options_in(b);
  ob.threads = 3;
  cmd_simulate(c, oa);
  cmd_simulate(c, ob);
  EXPECT_EQ(slurp(a / "simulate.json"), slurp(b / "simulate.json"));
  EXPECT_EQ(slurp(a / "snapshots.csv"), slurp(b / "snapshots.csv"));
  const Json doc = Json::parse(slurp(a / "simulate.json"));
  EXPECT_FALSE(doc.contains("metadata"));
  EXPECT_EQ(doc["command"], "simulate");
  EXPECT_EQ(doc["scenario"]["name"], "unit");
  EXPECT_TRUE(doc["all_passed"].get<bool>());
}

TEST(Commands, MetadataPresentWhenEnabled) {
  const fs::path dir = temp_dir("meta");
  cmd_simulate(parse_config(base_doc()), options_in(dir, true));
  const Json doc = Json::parse(slurp(dir / "simulate.json"));
  ASSERT_TRUE(doc.contains("metadata"));
  EXPECT_TRUE(doc["metadata"].contains("generated_at"));
}

TEST(Commands, LinearScatteringMatchesClosedForm) {
  Json d = base_doc();
  d["params"]["linear"] = true;
  d["grid"]["r_max"] = 32;
  d["profile"]["u1"] = Json{{"kind", "gaussian_bump"}, {"amplitude", 0.5}, {"center", 5}, {"width", 1}};
  const CommandOutcome o = cmd_scattering(parse_config(d), options_in(temp_dir("lin_scat")));
  bool seen = false;
  for (const auto& v : o.report.verdicts) {
    if (v.name != "linear_g_plus_exact_match") continue;
    seen = true;
    EXPECT_TRUE(v.passed);
    EXPECT_EQ(v.provenance, "closed-form");
  }
  EXPECT_TRUE(seen);
  EXPECT_EQ(o.exit_code, 0);
}

TEST(Commands, MorawetzFlagsShortHorizon) {
  Json d = base_doc();
  d["probes"]["morawetz_radii"] = Json::array({2, 6});
  const CommandOutcome o = cmd_verify_morawetz(parse_config(d), options_in(temp_dir("trunc")));
  const Json& rows = o.report.results["radii"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0]["horizon_truncated"].get<bool>());
  EXPECT_TRUE(rows[1]["horizon_truncated"].get<bool>());
}

TEST(Commands, ExitCodes) {
  const fs::path dir = temp_dir("exit");
  const fs::path good = dir / "good.json", bad = dir / "bad.json", failing = dir / "failing.json";
  write_atomic(good, zero_doc().dump());
  Json b = zero_doc();
  b["grid"]["dr"] = -1;
  write_atomic(bad, b.dump());
  Json f = base_doc();
  f["scattering"] = Json{{"min_scattered_ratio", 2.0}};
  write_atomic(failing, f.dump());
  std::ostringstream out, err;
  const CommandOptions o = options_in(dir / "out");
  EXPECT_EQ(run_command("simulate", good.string(), o, out, err), 0);
  EXPECT_NE(out.str().find("PASS energy_drift"), std::string::npos);
  EXPECT_EQ(run_command("simulate", bad.string(), o, out, err), 1);
  EXPECT_NE(err.str().find("grid.dr"), std::string::npos);
  EXPECT_EQ(run_command("teleport", good.string(), o, out, err), 1);
  EXPECT_EQ(run_command("simulate", (dir / "absent.json").string(), o, out, err), 1);
  EXPECT_EQ(run_command("scattering", failing.string(), o, out, err), 2);
  EXPECT_NE(out.str().find("FAIL scattered_ratio_at_horizon"), std::string::npos);
}

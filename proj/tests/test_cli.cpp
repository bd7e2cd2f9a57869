#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chlat/cli.hpp"

using namespace chlat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("chlat_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kMultTwo = R"(
[lattice]
k1 = 1/sqrt(2 - sqrt(3)), 0
k2 = (sqrt(3)/2)/sqrt(2 - sqrt(3)), (1/2)/sqrt(2 - sqrt(3))
[params]
lambda = auto:1.01
gamma2 = 0.3
gamma3 = 1
[sim]
N = 8
dt = 1
t_end = 300
seed = 11
record_every = 20
)";

}  // namespace

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(evaluate_expression("17/450"), 17.0 / 450.0);
  EXPECT_DOUBLE_EQ(evaluate_expression("-(7 - 6*sqrt(3))/(18 - 9*sqrt(3))"),
                   -(7 - 6 * std::sqrt(3.0)) / (18 - 9 * std::sqrt(3.0)));
  EXPECT_DOUBLE_EQ(evaluate_expression(" pi/25 "), kPi / 25);
  EXPECT_DOUBLE_EQ(evaluate_expression("1e-3"), 1e-3);
  EXPECT_THROW(evaluate_expression("2 +"), Error);
  EXPECT_THROW(evaluate_expression("abc"), Error);
  EXPECT_THROW(evaluate_expression("1/0"), Error);
}

TEST(Config, StrictKeys) {
  auto code_of = [](const std::string& text) {
    try {
      parse_ini(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::BlowUp;  // no error
  };
  std::string ok = "[lattice]\nk1 = 1, 0\nk2 = 0, 1\n[params]\nlambda = 2\n";
  EXPECT_EQ(code_of(ok), ErrorCode::BlowUp);
  EXPECT_EQ(code_of(ok + "gamma4 = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "[extras]\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "lambda = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "[lattice]\nl1 = 1, 0\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[lattice]\nk1 = 1, 0\nk2 = 0, 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "[sim]\nN = 2.5\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "[sim]\nscheme = rk4\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(ok + "[output]\nformats = gif\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[lattice]\nk1 = 1\nk2 = 0, 1\n[params]\nlambda = 2\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("lambda = 2\n"), ErrorCode::ConfigError);
}

TEST(Config, JsonMatchesIni) {
  auto a = parse_ini(
      "[lattice]\nl1 = pi/25, 0\nl2 = 0, pi/25\nshell = 1,0; 0,1\n[params]\nlambda = auto:1.5\ngamma2 = 1\n"
      "even = true\n[sim]\ninit_phases = 0.5, 1\n[output]\nformats = png, csv\n");
  auto b = parse_json_config(R"({"lattice": {"l1": ["pi/25", 0], "l2": [0, "pi/25"], "shell": [[1,0],[0,1]]},
      "params": {"lambda": "auto:1.5", "gamma2": 1, "even": true},
      "sim": {"init_phases": [0.5, 1]}, "output": {"formats": ["png", "csv"]}})");
  EXPECT_EQ(a.lattice.l1.x, b.lattice.l1.x);
  EXPECT_EQ(a.lattice.l2.y, b.lattice.l2.y);
  EXPECT_EQ(a.shell, b.shell);
  EXPECT_TRUE(b.lambda_auto);
  EXPECT_EQ(a.lambda_factor, b.lambda_factor);
  EXPECT_EQ(a.even, b.even);
  EXPECT_EQ(a.sim.init_phases, b.sim.init_phases);
  EXPECT_EQ(a.formats, b.formats);
  EXPECT_THROW(parse_json_config(R"({"params": {"lambda": 1, "bogus": 2}})"), Error);
}

TEST(Analyze, AutoLambdaAndExample) {
  auto dir = scratch("auto");
  auto cfg = write(dir / "sq.ini", "[lattice]\nl1 = pi/25, 0\nl2 = 0, pi/25\n[params]\nlambda = auto:1.01\ngamma2 = 1\ngamma3 = 1\n");
  auto r = cli({"analyze", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema_version"], "1");
  auto& a = j["analysis"];
  EXPECT_EQ(a["critical_set"]["multiplicity"], 4);
  EXPECT_NEAR(a["critical_set"]["lambda0"].get<double>(), 2500, 1e-9);
  EXPECT_NEAR(a["params"]["lambda"].get<double>(), 2525, 1e-9);
  EXPECT_EQ(a["verdict"]["transition_type"], "TypeI");
}

TEST(Analyze, HexagonalIsResonant) {
  auto dir = scratch("hex");
  auto cfg = write(dir / "h.ini", "[lattice]\nk1 = 1, 0\nk2 = -1/2, -sqrt(3)/2\n[params]\nlambda = auto:1.01\neven = true\n");
  auto r = cli({"analyze", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  auto a = nlohmann::json::parse(r.out)["analysis"];
  EXPECT_EQ(a["critical_set"]["multiplicity"], 6);
  EXPECT_EQ(a["critical_set"]["resonance"], "Mult6Resonant");
}

TEST(Analyze, ExitCodes) {
  auto dir = scratch("codes");
  auto degenerate = write(dir / "d.ini", "[lattice]\nl1 = 1, 2\nl2 = 2, 4\n[params]\nlambda = 1\n");
  auto r = cli({"analyze", "--config", degenerate});
  EXPECT_EQ(r.code, 2);
  auto e = nlohmann::json::parse(r.err);
  EXPECT_EQ(e["error"]["code"], "DegenerateLattice");
  EXPECT_EQ(e["error"]["exit_code"], 2);

  auto eight = write(dir / "e.ini", "[lattice]\nk1 = 1, 0\nk2 = 0, 1\n[params]\nlambda = 20\nsigma = 25\n");
  EXPECT_EQ(cli({"analyze", "--config", eight}).code, 3);
  auto general = write(dir / "g.ini", "[lattice]\nk1 = 1, 0\nk2 = -1/2, -sqrt(3)/2\n[params]\nlambda = 2\ngamma2 = 1\n");
  EXPECT_EQ(cli({"analyze", "--config", general}).code, 3);
  auto unknown = write(dir / "u.ini", "[lattice]\nk1 = 1, 0\nk2 = 0, 1\n[params]\nlambda = 2\ncolour = red\n");
  EXPECT_EQ(cli({"analyze", "--config", unknown}).code, 2);
  EXPECT_EQ(cli({"analyze", "--config", (dir / "missing.ini").string()}).code, 2);
  EXPECT_EQ(cli({"analyze"}).code, 2);
  EXPECT_EQ(cli({"reproduce", "fig9.9"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);

  auto coarse = write(dir / "c.ini", std::string(kMultTwo) + "[render]\nsource = coordinates\ncoordinates = 1\nwidth = 2\nheight = 2\n");
  EXPECT_EQ(cli({"render", "--config", coarse, "--out", (dir / "o").string()}).code, 4);
}

TEST(Simulate, SnapshotOnly) {
  auto dir = scratch("snap");
  auto cfg = write(dir / "s.ini", std::string(kMultTwo));
  auto r = cli({"simulate", "--config", cfg, "--out", (dir / "o").string(), "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto zero = write(dir / "z.ini", std::string(kMultTwo) + "t_end = 0\n");
  EXPECT_EQ(cli({"simulate", "--config", zero}).code, 2);  // duplicate key
  std::string text = kMultTwo;
  text.replace(text.find("t_end = 300"), 11, "t_end = 0");
  auto snap = write(dir / "snap.ini", text);
  r = cli({"simulate", "--config", snap, "--out", (dir / "s0").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["simulation"]["steps"], 0);
  EXPECT_EQ(j["simulation"]["observed"], "not_run");
  auto hist = slurp(dir / "s0" / "simulate_history.csv");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 2);
}

TEST(Simulate, ConsistencyNote) {
  auto dir = scratch("note");
  std::string text = kMultTwo;
  text.replace(text.find("t_end = 300"), 11, "t_end = 3000");
  auto cfg = write(dir / "s.ini", text + "reduced = true\n");
  auto r = cli({"simulate", "--config", cfg, "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "o" / "simulate_consistency.txt"), "observed: settled, predicted: TypeI, consistent: true\n");
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reduced"]["nearest"], "p1");
  EXPECT_TRUE(fs::exists(dir / "o" / "simulate_reduced.csv"));
  // The saved field renders through the field-file path.
  auto render = write(dir / "r.ini", std::string(kMultTwo) + "[render]\nsource = field\nfield_file = o/simulate_final_field.csv\nwidth = 64\nheight = 64\n");
  auto rr = cli({"render", "--config", render, "--out", (dir / "img").string(), "--format", "pgm"});
  ASSERT_EQ(rr.code, 0) << rr.err;
  EXPECT_EQ(nlohmann::json::parse(rr.out)["render"]["pattern"], "Roll");
}

TEST(Simulate, JumpRecordsEscape) {
  auto dir = scratch("jump");
  std::string text = kMultTwo;
  text.replace(text.find("gamma2 = 0.3"), 12, "gamma2 = 1");
  text.replace(text.find("gamma3 = 1"), 10, "gamma3 = 0.1");
  text.replace(text.find("t_end = 300"), 11, "t_end = 5000");
  auto cfg = write(dir / "j.ini", text);
  auto r = cli({"simulate", "--config", cfg, "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto s = nlohmann::json::parse(r.out)["simulation"];
  EXPECT_TRUE(s["escape_flag"].get<bool>());
  EXPECT_GT(s["escape_time"].get<double>(), 0.0);
  EXPECT_EQ(s["predicted"], "TypeII");
  EXPECT_TRUE(s["consistent"].get<bool>());
}

TEST(Determinism, ByteIdenticalOutputs) {
  auto dir = scratch("det");
  auto cfg = write(dir / "s.ini", std::string(kMultTwo) + "reduced = true\n");
  for (const char* run : {"a", "b"}) {
    auto r = cli({"simulate", "--config", cfg, "--out", (dir / run).string(), "--seed", "99"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto an = cli({"analyze", "--config", cfg, "--out", (dir / run).string()});
    ASSERT_EQ(an.code, 0) << an.err;
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 6);
  auto other = cli({"simulate", "--config", cfg, "--out", (dir / "c").string(), "--seed", "100"});
  ASSERT_EQ(other.code, 0);
  EXPECT_NE(slurp(dir / "a" / "simulate_final_field.csv"), slurp(dir / "c" / "simulate_final_field.csv"));
}

TEST(Render, RollPhasesTranslate) {
  auto dir = scratch("phase");
  std::string base = std::string(kMultTwo) + "[render]\nsource = coordinates\ncoordinates = 0.5\nwidth = 64\nheight = 48\n";
  auto c0 = write(dir / "p0.ini", base + "phases = 0\n[output]\nname = zero\n");
  auto c1 = write(dir / "p1.ini", base + "phases = pi/2\n[output]\nname = quarter\n");
  ASSERT_EQ(cli({"render", "--config", c0, "--out", (dir / "o").string(), "--format", "csv"}).code, 0);
  ASSERT_EQ(cli({"render", "--config", c1, "--out", (dir / "o").string(), "--format", "csv"}).code, 0);
  FieldRaster a, b;
  for (const auto& e : fs::directory_iterator(dir / "o")) {
    if (e.path().extension() != ".csv") continue;
    auto name = e.path().filename().string();
    (name.rfind("zero", 0) == 0 ? a : b) = read_raster_csv(e.path().string());
    EXPECT_NE(name.find("_Roll_"), std::string::npos) << name;
  }
  ASSERT_EQ(a.width, 64);
  ASSERT_EQ(b.width, 64);
  double diff = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
  EXPECT_GT(diff, 0.1);
  // The shell mode is (n1, n2) = (-1, 1) in raster pixels: a quarter period is a
  // shift by width/4 along the first axis or height/4 along the second.
  double best = 1e300;
  for (int s1 = -16; s1 <= 16; s1 += 16)
    for (int s2 = -12; s2 <= 12; s2 += 12) {
      double worst = 0;
      for (int row = 0; row < 48; ++row)
        for (int col = 0; col < 64; ++col)
          worst = std::max(worst, std::abs(b.at(col, row) - a.at((col + s1 + 64) % 64, (row + s2 + 48) % 48)));
      best = std::min(best, worst);
    }
  EXPECT_LT(best, 1e-12);
}

TEST(Reproduce, FigurePatterns) {
  auto dir = scratch("figs");
  std::map<std::string, std::string> want{{"fig5.2", "Roll"}, {"fig5.3", "Roll"}, {"fig5.4", "SquareTorus"},
                                          {"fig6.1", "Roll"}, {"fig8.1", "Roll"}, {"fig8.2", "Roll"},
                                          {"fig8.3", "Hexagon"}};
  for (const auto& [fig, pattern] : want) {
    auto r = cli({"reproduce", fig, "--out", dir.string(), "--format", "pgm"});
    ASSERT_EQ(r.code, 0) << fig << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["render"]["pattern"], pattern) << fig;
    EXPECT_EQ(j["figure"], fig);
  }
}

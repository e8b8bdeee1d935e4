#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iterreg/commands.hpp"
#include "iterreg/errors.hpp"

using namespace iterreg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("iterreg_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Json base_config(Eigen::Index m, const fs::path& dir) {
  Json doc = Json::parse(R"({
    "kernel": {"type": "gaussian", "bandwidth": 0.5},
    "loss": {"name": "hinge"},
    "schedule": {"theta": 0.55},
    "stopping": {"fixed": {"T": 1}},
    "data": {"synthetic": {"dist": {"type": "flip", "w": [1.0, -1.0], "bias": 0.0, "flip": 0.1}, "m": 10}},
    "seed": 3,
    "evaluation": {"mc_samples": 2000}
  })");
  doc["data"]["synthetic"]["m"] = m;
  doc["output"] = Json{{"path_csv", (dir / "path.csv").string()},
                       {"model_json", (dir / "model.json").string()},
                       {"report_json", (dir / "report.json").string()}};
  return doc;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

int train_with(const Json& doc) {
  std::ostringstream err;
  const int code = cmd_train(parse_config(doc), err);
  if (code != kExitOk) MESSAGE(err.str());
  return code;
}

}  // namespace

TEST_CASE("fixed T = 1 writes one path row") {
  TempDir dir("fixed1");
  REQUIRE(train_with(base_config(10, dir.path)) == kExitOk);
  const auto lines = lines_of(dir.path / "path.csv");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "t,eta_t,empirical_risk,rkhs_norm,subgrad_norm");
  const auto row = split(lines[1]);
  CHECK(row[0] == "1");
  CHECK(std::stod(row[2]) == 1.0);  // f_1 = 0 has hinge risk 1
  CHECK(std::stod(row[3]) == 0.0);

  const Json report = load_json_file(dir.path / "report.json");
  for (const char* v : {"last", "averaged", "best"}) {
    REQUIRE(report.contains(v));
    CHECK(report[v]["mc_samples"] == 2000);
    CHECK(report[v]["expected_risk"].get<double>() == 1.0);
  }
}

TEST_CASE("theoretical stopping with m = 1000 in the 2/3 regime runs 100 iterations") {
  TempDir dir("theoretical");
  Json doc = base_config(1000, dir.path);
  doc["schedule"]["theta"] = 0.5;
  doc["stopping"] = Json::parse(R"({"theoretical": {"rule": "general", "tau": 0, "beta": 1}})");
  REQUIRE(train_with(doc) == kExitOk);
  CHECK(lines_of(dir.path / "path.csv").size() == 101);
  CHECK(load_json_file(dir.path / "model.json")["iterations"] == 100);
}

TEST_CASE("hold-out path has the validation column and a stop marker") {
  TempDir dir("holdout");
  Json doc = base_config(60, dir.path);
  doc["stopping"] = Json::parse(R"({"holdout": {"split": 0.75, "T_max": 40}})");
  REQUIRE(train_with(doc) == kExitOk);
  const auto lines = lines_of(dir.path / "path.csv");
  REQUIRE(lines.size() == 42);
  CHECK(lines[0] == "t,eta_t,empirical_risk,rkhs_norm,subgrad_norm,validation_risk");
  const auto marker = split(lines.back());
  REQUIRE(marker.size() == 6);
  CHECK(marker[0] == "stop");
  const int t_star = std::stoi(marker[1]);
  CHECK(t_star >= 1);
  CHECK(t_star <= 40);
  double best = 1e300;
  int arg = 0;
  for (int t = 1; t <= 40; ++t) {
    const double v = std::stod(split(lines[static_cast<std::size_t>(t)])[5]);
    if (v < best) {
      best = v;
      arg = t;
    }
  }
  CHECK(arg == t_star);
  const Json model = load_json_file(dir.path / "model.json");
  CHECK(model["iterations"] == t_star);
  CHECK(model["centers"].size() == 45);
}

TEST_CASE("model json round trip reproduces the final path risk") {
  TempDir dir("roundtrip");
  Json doc = base_config(80, dir.path);
  doc["stopping"] = Json{{"fixed", {{"T", 60}}}};
  REQUIRE(train_with(doc) == kExitOk);

  const LoadedModel m = load_model(dir.path / "model.json");
  const Sample data = load_data(parse_config(doc));
  REQUIRE(m.centers.rows() == data.size());
  Matrix coeffs(m.centers.rows(), 3);
  coeffs << m.last, m.averaged, m.best;
  const Matrix pred = predict_many(m.kernel, m.centers, coeffs, data.X);

  const auto lines = lines_of(dir.path / "path.csv");
  REQUIRE(lines.size() == 61);
  const double final_risk = std::stod(split(lines.back())[2]);
  CHECK(empirical_risk(m.loss, pred.col(0), data.y) == doctest::Approx(final_risk).epsilon(1e-12));

  double column_min = 1e300;
  for (std::size_t i = 1; i < lines.size(); ++i) column_min = std::min(column_min, std::stod(split(lines[i])[2]));
  CHECK(empirical_risk(m.loss, pred.col(2), data.y) == doctest::Approx(column_min).epsilon(1e-12));

  const Json model = load_json_file(dir.path / "model.json");
  CHECK(empirical_risk(m.loss, pred.col(1), data.y) ==
        doctest::Approx(model["training_risk"]["averaged"].get<double>()).epsilon(1e-12));
}

TEST_CASE("exit codes") {
  TempDir dir("exits");
  std::ostringstream err;
  SUBCASE("config errors") {
    Json doc = base_config(10, dir.path);
    doc["kernel"]["type"] = "laplace";
    CHECK(train_with(doc) == kExitConfig);
    Json unknown = base_config(10, dir.path);
    unknown["schedule"]["thetaa"] = 0.5;
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    Json two = base_config(10, dir.path);
    two["stopping"]["holdout"] = Json{{"split", 0.8}};
    CHECK_THROWS_AS(parse_config(two), ConfigError);
    Json expo = base_config(10, dir.path);
    expo["loss"]["name"] = "exponential";
    CHECK_THROWS_AS(parse_config(expo), ConfigError);
  }
  SUBCASE("inadmissible schedule") {
    Json doc = base_config(10, dir.path);
    doc["schedule"]["eta1"] = 5.0;
    CHECK(train_with(doc) == kExitInadmissible);
  }
  SUBCASE("forced schedule that diverges") {
    Json doc = base_config(40, dir.path);
    doc["loss"] = Json{{"name", "square"}};
    doc["data"]["synthetic"]["dist"] = Json::parse(
        R"({"type": "regression_rkhs", "noise": 0.1, "dim": 2, "kernel": {"type": "gaussian", "bandwidth": 0.5},
            "n_centers": 4, "target_seed": 1})");
    doc["schedule"] = Json{{"theta", 0.6}, {"eta1", 1000.0}, {"force", true}};
    doc["stopping"] = Json{{"fixed", {{"T", 100}}}};
    CHECK(train_with(doc) == kExitDivergence);
  }
  SUBCASE("forced but tame schedule marks every row") {
    Json doc = base_config(20, dir.path);
    doc["schedule"] = Json{{"theta", 0.55}, {"eta1", 0.5}, {"force", true}};
    doc["stopping"] = Json{{"fixed", {{"T", 5}}}};
    REQUIRE(train_with(doc) == kExitOk);
    const auto lines = lines_of(dir.path / "path.csv");
    CHECK(lines[0].size() > 0);
    CHECK(split(lines[0]).back() == "forced");
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split(lines[i]).back() == "1");
  }
}

TEST_CASE("overrides") {
  Json doc = base_config(10, fs::temp_directory_path());
  apply_override(doc, "schedule.theta=0.75");
  apply_override(doc, "loss.name=logistic");
  apply_override(doc, "stopping={\"fixed\": {\"T\": 7}}");
  const RunConfig cfg = parse_config(doc);
  CHECK(cfg.theta == 0.75);
  CHECK(loss_from_json(cfg.loss).kind() == LossKind::logistic);
  CHECK(std::get<FixedStop>(cfg.stopping).T == 7);
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST_CASE("indices command") {
  IndicesRequest req;
  req.params.q = 0;
  req.params.tau = 0;
  req.params.beta = 1;
  req.params.zeta = 1.999999999;
  req.params.theta = 0.5;
  req.m = 1000;
  std::ostringstream out, err;
  REQUIRE(cmd_indices(req, out, err) == kExitOk);
  const Json j = Json::parse(out.str());
  CHECK(j["gamma"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(j["alpha"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(j["T"] == 100);

  req.params.smooth = true;
  req.params.theta = 0.0;
  std::ostringstream out2;
  REQUIRE(cmd_indices(req, out2, err) == kExitOk);
  CHECK(Json::parse(out2.str())["gamma"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  req.params.smooth = false;
  req.params.theta = 1.5;
  std::ostringstream out3, err3;
  CHECK(cmd_indices(req, out3, err3) == kExitConfig);
  CHECK(err3.str().find("theta") != std::string::npos);
}

TEST_CASE("rates writes one row per size, repetition and variant") {
  TempDir dir("rates");
  Json doc = base_config(10, dir.path);
  doc["stopping"] = Json::parse(R"({"theoretical": {"rule": "hinge", "beta": 1}})");
  doc["rates"] = Json{{"m_grid", {128, 256}},
                      {"repetitions", 1},
                      {"timing", false},
                      {"csv", (dir.path / "rates.csv").string()},
                      {"summary_json", (dir.path / "summary.json").string()}};
  std::ostringstream err;
  REQUIRE(cmd_rates(parse_config(doc), err) == kExitOk);
  const auto lines = lines_of(dir.path / "rates.csv");
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "m,repetition,variant,T,excess_risk,stderr,excess_misclassification,t_star,wall_time_s");
  const Json summary = load_json_file(dir.path / "summary.json");
  CHECK(summary["slope"].contains("last"));
  CHECK(summary["median_excess_risk"]["best"].size() == 2);

  const std::string first = slurp(dir.path / "rates.csv");
  REQUIRE(cmd_rates(parse_config(doc), err) == kExitOk);
  CHECK(slurp(dir.path / "rates.csv") == first);
}

TEST_CASE("log-log slope") {
  CHECK(*loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK_FALSE(loglog_slope({1, 10}, {1, -1}).has_value());
}

TEST_CASE("identical configurations give byte-identical artifacts") {
  TempDir a("det_a"), b("det_b");
  Json da = base_config(150, a.path), db = base_config(150, b.path);
  for (Json* d : {&da, &db}) (*d)["stopping"] = Json{{"fixed", {{"T", 80}}}};
  REQUIRE(train_with(da) == kExitOk);
  REQUIRE(train_with(db) == kExitOk);
  CHECK(slurp(a.path / "path.csv") == slurp(b.path / "path.csv"));
  CHECK(slurp(a.path / "model.json") == slurp(b.path / "model.json"));
  CHECK(slurp(a.path / "report.json") == slurp(b.path / "report.json"));
}

TEST_CASE("sample export") {
  TempDir dir("sample");
  std::ostringstream err;
  const Json dist = Json::parse(R"({"type": "margin", "dim": 3, "s": 1.0})");
  REQUIRE(cmd_sample(dist, 25, 4, dir.path / "s.csv", err) == kExitOk);
  const auto lines = lines_of(dir.path / "s.csv");
  REQUIRE(lines.size() == 26);
  CHECK(lines[0] == "x0,x1,x2,y");
  const Sample back = read_csv(dir.path / "s.csv");
  const Sample orig = sample(dist_from_json(dist), 25, 4);
  CHECK(back.X == orig.X);
  CHECK(back.y == orig.y);
  CHECK(cmd_sample(dist, 0, 4, dir.path / "t.csv", err) == kExitConfig);
}

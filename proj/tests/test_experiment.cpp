#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "altune/dataset_io.hpp"
#include "altune/errors.hpp"
#include "altune/experiment.hpp"
#include "altune/synthetic_players.hpp"

using namespace altune;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_regression() {
  return parse_config(R"(
[experiment]
folds = 2
seed_size = 10
budget = 25
pool_size = 120
[gp]
restarts = 1
[strategy]
strategy = random, ucb
)");
}

ExperimentConfig small_classification() {
  return parse_config(R"(
[experiment]
task = classification
folds = 2
seed_size = 10
budget = 18
pool_size = 80
[mlp]
epochs = 50
[strategy]
strategy = random, entropy, qbb_vote
bag_count = 3
)");
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("altune_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("fold splits partition the data and are shared per fold") {
  const auto c = parse_config("");
  const auto a = split_fold(c, 0, 991);
  CHECK(a.test.size() == 99);
  CHECK(a.seed.size() == 30);
  CHECK(a.pool.size() == 991 - 99 - 30);
  std::set<std::size_t> all(a.test.begin(), a.test.end());
  all.insert(a.seed.begin(), a.seed.end());
  all.insert(a.pool.begin(), a.pool.end());
  CHECK(all.size() == 991);
  CHECK(split_fold(c, 0, 991).test == a.test);
  CHECK(split_fold(c, 1, 991).test != a.test);
  CHECK(split_fold(c, 0, 416).test.size() == 42);
}

TEST_CASE("run seeds depend on every coordinate") {
  const auto s = run_seed(1, 0, "gp", "ucb");
  CHECK(s == run_seed(1, 0, "gp", "ucb"));
  CHECK(s != run_seed(2, 0, "gp", "ucb"));
  CHECK(s != run_seed(1, 1, "gp", "ucb"));
  CHECK(s != run_seed(1, 0, "gp", "ei"));
}

TEST_CASE("regression fold emits one record per checkpoint") {
  auto c = small_regression();
  const auto data = load_data(c);
  auto r = run_fold(c, 0, "gp", "ucb", data);
  CHECK(r.records.size() == 16);
  CHECK(r.objective_records.size() == 16);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].n_train == 10 + i);
    CHECK(r.records[i].metric_name == "mse");
    CHECK(r.records[i].available());
    CHECK(r.records[i].metric_value >= 0.0);
  }
  c.eval_every = 4;
  r = run_fold(c, 0, "gp", "ucb", data);
  std::vector<std::size_t> n;
  for (const auto& rec : r.records) n.push_back(rec.n_train);
  CHECK(n == std::vector<std::size_t>{10, 14, 18, 22, 25});
}

TEST_CASE("runs are reproducible") {
  const auto c = small_regression();
  const auto data = load_data(c);
  CHECK(run_fold(c, 1, "gp", "random", data).records == run_fold(c, 1, "gp", "random", data).records);
}

TEST_CASE("record count for two folds and two strategies") {
  const auto c = parse_config(R"(
[experiment]
folds = 2
budget = 40
[gp]
restarts = 0
[strategy]
strategy = random, variance
)");
  const auto result = run_experiment(c, 1);
  CHECK(result.records.size() == 2 * 2 * 11);
}

TEST_CASE("classification runs with N/A cells for probabilistic strategies on mlp") {
  const auto c = small_classification();
  const auto result = run_experiment(c, 2);
  std::size_t na = 0;
  for (const auto& r : result.records) {
    CHECK(r.metric_name == "f1");
    if (r.model == "mlp" && r.strategy == "entropy") {
      CHECK_FALSE(r.available());
      CHECK(r.n_train == c.seed_size);
      ++na;
    } else {
      CHECK(r.available());
      CHECK(r.metric_value >= 0.0);
      CHECK(r.metric_value <= 1.0);
    }
  }
  CHECK(na == c.folds);
  CHECK(result.records.size() == c.folds * (8 * 9 + 1));
}

TEST_CASE("output does not depend on the number of workers") {
  const auto c = small_classification();
  const auto data = load_data(c);
  const auto a = run_experiment(c, data, 1);
  const auto b = run_experiment(c, data, 4);
  CHECK(a.records == b.records);
}

TEST_CASE("records are ordered by fold, model, strategy and n_train") {
  const auto c = small_classification();
  const auto result = run_experiment(c, 3);
  auto rank = [&](const ExperimentRecord& r) {
    const auto m = std::find(c.models.begin(), c.models.end(), r.model) - c.models.begin();
    const auto s = std::find(c.strategies.begin(), c.strategies.end(), r.strategy) - c.strategies.begin();
    return std::tuple(r.fold, m, s, r.n_train);
  };
  CHECK(std::is_sorted(result.records.begin(), result.records.end(),
                       [&](const auto& x, const auto& y) { return rank(x) < rank(y); }));
}

TEST_CASE("summary is the plain window mean") {
  std::vector<ExperimentRecord> records;
  for (std::size_t n = 50; n <= 80; ++n)
    records.push_back({0, "gp", "ucb", n, "mse", static_cast<double>(n), 1});
  records.push_back({1, "gp", "ucb", 65, "mse", 100.0, 2});
  const auto rows = summarize(records, {65}, 5);
  REQUIRE(rows.size() == 1);
  double sum = 100.0;
  for (std::size_t n = 60; n <= 70; ++n) sum += static_cast<double>(n);
  CHECK(rows[0].mean_metric == doctest::Approx(sum / 12.0));
  CHECK(rows[0].window_halfwidth == 5);
  CHECK(std::isnan(summarize(records, {200}, 5)[0].mean_metric));
}

TEST_CASE("improvement over random") {
  std::vector<ExperimentRecord> records{
      {0, "gp", "random", 30, "mse", 4.0, 1}, {1, "gp", "random", 30, "mse", 6.0, 2},
      {0, "gp", "ucb", 30, "mse", 3.0, 3},    {1, "gp", "ucb", 30, "mse", 4.0, 4},
      {0, "ksvm", "random", 30, "f1", 0.5, 5}, {0, "ksvm", "qbb_vote", 30, "f1", 0.7, 6}};
  const auto rows = improvement_over_random(records);
  for (const auto& r : rows) {
    if (r.strategy == "random") CHECK(r.improvement == 0.0);
    if (r.strategy == "ucb") CHECK(r.improvement == doctest::Approx(1.5));
    if (r.strategy == "qbb_vote") CHECK(r.improvement == doctest::Approx(0.2));
  }
  CHECK(rows.size() == 4);
  records.erase(records.begin(), records.begin() + 2);
  records.erase(records.begin() + 2);
  CHECK(improvement_over_random(records).empty());
}

TEST_CASE("records csv round trip") {
  const std::vector<ExperimentRecord> records{
      {0, "gp", "ucb", 30, "mse", 1.0 / 3.0, 18446744073709551615ULL},
      {3, "mlp", "entropy", 30, "f1", std::nan(""), 7}};
  std::stringstream s;
  write_records(s, records);
  CHECK(s.str().rfind("fold,model,strategy,n_train,metric_name,metric_value,seed\n", 0) == 0);
  CHECK(s.str().find(",NA,") != std::string::npos);
  CHECK(read_records(s) == records);
  std::stringstream bad("fold,model\n");
  CHECK_THROWS(read_records(bad));
}

TEST_CASE("emit_outputs writes every file") {
  const auto c = small_regression();
  const auto result = run_experiment(c, 1);
  const auto dir = scratch("emit");
  emit_outputs(result, c, dir / "nested");
  for (const char* f : {"records.csv", "summary.csv", "improvement.csv", "config_echo.ini", "objective_records.csv"})
    CHECK(fs::exists(dir / "nested" / f));
  CHECK(load_records(dir / "nested" / "records.csv") == result.records);
  CHECK(to_config_text(parse_config(slurp(dir / "nested" / "config_echo.ini"))) == to_config_text(c));
  CHECK(slurp(dir / "nested" / "summary.csv").rfind("strategy,model,window_center,window_halfwidth,mean_metric\n", 0) == 0);

  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS(emit_outputs(result, c, dir / "blocker" / "out"));
  fs::remove_all(dir);
}

TEST_CASE("dataset csv round trip and import") {
  const auto dir = scratch("data");
  fs::create_directories(dir);
  const auto reg = generate_regression_pool(120, {}, default_enemy_space(), 3).samples();
  save_regression_csv(dir / "reg.csv", reg);
  CHECK(slurp(dir / "reg.csv").rfind("bullet_speed,bullet_size,fire_rate,hits\n", 0) == 0);
  const auto back = load_regression_csv(dir / "reg.csv", default_enemy_space());
  REQUIRE(back.size() == reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(back[i].point == reg[i].point);
    CHECK(back[i].hits == reg[i].hits);
  }

  const auto pref = generate_preference_pool(50, {}, default_control_space(), 3).samples();
  save_preference_csv(dir / "pref.csv", pref);
  CHECK(slurp(dir / "pref.csv").rfind("drag,thrust,prev_drag,prev_thrust,label\n", 0) == 0);
  const auto pback = load_preference_csv(dir / "pref.csv", default_control_space());
  REQUIRE(pback.size() == pref.size());
  CHECK(pback[7].label == pref[7].label);

  auto c = small_regression();
  c.data = (dir / "reg.csv").string();
  const auto data = load_data(c);
  CHECK(data.regression.size() == 120);
  c.budget = 200;
  CHECK_THROWS_AS(load_data(c), ConfigError);

  std::stringstream wrong("speed,size,rate,hits\n");
  CHECK_THROWS(read_regression_csv(wrong, default_enemy_space()));
  std::stringstream outside("bullet_speed,bullet_size,fire_rate,hits\n50,3,1,2\n");
  CHECK_THROWS(read_regression_csv(outside, default_enemy_space()));
  std::stringstream label("drag,thrust,prev_drag,prev_thrust,label\n1,100,1,100,same\n");
  CHECK_THROWS(read_preference_csv(label, default_control_space()));
  fs::remove_all(dir);
}

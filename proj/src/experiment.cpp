#include "altune/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "altune/acquisition_classification.hpp"
#include "altune/acquisition_regression.hpp"
#include "altune/classifiers.hpp"
#include "altune/dataset_io.hpp"
#include "altune/errors.hpp"
#include "altune/gp_regression.hpp"
#include "altune/synthetic_players.hpp"

namespace altune {

namespace {

constexpr double kNotAvailable = std::numeric_limits<double>::quiet_NaN();
constexpr int kHyperparamIterations = 60;

std::size_t test_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

template <typename Sample>
Eigen::MatrixXd unit_inputs(const std::vector<Sample>& samples, const ParameterSpace& space) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = space.normalize(samples[i].point).transpose();
  return x;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void erase_sorted(std::vector<std::size_t>& v, std::size_t value) {
  const auto it = std::lower_bound(v.begin(), v.end(), value);
  if (it == v.end() || *it != value) throw std::logic_error("acquired index is not in the pool");
  v.erase(it);
}

bool is_checkpoint(const ExperimentConfig& c, std::size_t n) {
  return n == c.budget || (n - c.seed_size) % c.eval_every == 0;
}

void check_disjoint(const FoldSplit& s, std::size_t n) {
  std::vector<int> owner(n, 0);
  for (const auto* part : {&s.test, &s.seed, &s.pool})
    for (std::size_t i : *part) {
      if (i >= n || owner[i]++ != 0) throw std::logic_error("fold split is not a partition");
    }
}

FoldResult run_regression(const ExperimentConfig& config, std::size_t fold, const std::string& model,
                          const std::string& strategy_name, const ExperimentData& data) {
  if (model != "gp") throw std::invalid_argument("regression supports only the gp model");
  RegressionStrategy strategy = config.regression_strategy;
  strategy.kind = parse_regression_strategy(strategy_name);

  const auto& samples = data.regression;
  const std::uint64_t seed = run_seed(config.master_seed, fold, model, strategy_name);
  Rng rng(seed);
  const FoldSplit split = split_fold(config, fold, samples.size());
  const Eigen::MatrixXd all = unit_inputs(samples, config.enemy_space);
  const Eigen::MatrixXd test_x = gather_rows(all, split.test);
  const auto objective = config.objective();

  std::vector<std::size_t> train = split.seed;
  std::vector<std::size_t> unused = split.pool;
  std::sort(unused.begin(), unused.end());
  std::vector<double> train_hits;
  for (std::size_t i : train) train_hits.push_back(samples[i].hits);
  Incumbent incumbent = Incumbent::from_hits(train_hits, objective);
  KernelParams kernel = config.kernel(all.cols());

  FoldResult result;
  for (std::size_t n = config.seed_size;; ++n) {
    if (train.size() != n) throw std::logic_error("training set size drifted from n_train");
    const Eigen::MatrixXd x = gather_rows(all, train);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train_hits.data(), static_cast<Eigen::Index>(n));
    const std::size_t acquired = n - config.seed_size;
    if (config.gp_optimize && acquired % config.gp_refit_every == 0 && n >= 3) {
      kernel = optimize_hyperparams(x, y, kernel, {config.gp_restarts, kHyperparamIterations}, rng).params;
    }
    const GPModel gp = GPModel::fit(x, y, kernel);

    if (is_checkpoint(config, n)) {
      const Eigen::VectorXd pred = gp.predict_batch(test_x).mean;
      double mse = 0.0;
      double objective_mse = 0.0;
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        const double truth = samples[split.test[i]].hits;
        const double p = pred[static_cast<Eigen::Index>(i)];
        mse += (p - truth) * (p - truth);
        const double gap = objective_loss(p, objective) - objective_loss(truth, objective);
        objective_mse += gap * gap;
      }
      const auto count = static_cast<double>(split.test.size());
      result.records.push_back({fold, model, strategy_name, n, "mse", mse / count, seed});
      result.objective_records.push_back({fold, model, strategy_name, n, "objective_mse", objective_mse / count, seed});
    }
    if (n == config.budget) break;

    const std::size_t next = select_next(strategy, gp, all, unused, incumbent, objective, rng, acquired + 1);
    erase_sorted(unused, next);
    train.push_back(next);
    train_hits.push_back(samples[next].hits);
    incumbent.observe(samples[next].hits, objective);
  }
  return result;
}

FoldResult run_classification(const ExperimentConfig& config, std::size_t fold, const std::string& model,
                              const std::string& strategy_name, const ExperimentData& data) {
  const ClassifierConfig classifier = config.classifier_config(parse_classifier_kind(model));
  ClassificationStrategy strategy = config.classification_strategy;
  strategy.kind = parse_classification_strategy(strategy_name);

  const std::uint64_t seed = run_seed(config.master_seed, fold, model, strategy_name);
  FoldResult result;
  if (requires_probabilities(strategy.kind) && classifier.kind == ClassifierKind::mlp) {
    result.records.push_back({fold, model, strategy_name, config.seed_size, "f1", kNotAvailable, seed});
    return result;
  }

  const auto& samples = data.preference;
  Rng rng(seed);
  const FoldSplit split = split_fold(config, fold, samples.size());
  const Eigen::MatrixXd all = unit_inputs(samples, config.control_space);
  std::vector<Preference> truths;
  for (std::size_t i : split.test) truths.push_back(samples[i].label);

  LabeledSet train;
  train.inputs = gather_rows(all, split.seed);
  for (std::size_t i : split.seed) train.labels.push_back(samples[i].label);
  std::vector<std::size_t> unused = split.pool;
  std::sort(unused.begin(), unused.end());

  for (std::size_t n = config.seed_size;; ++n) {
    if (train.size() != n) throw std::logic_error("training set size drifted from n_train");
    Rng fit_rng(derive_seed(seed, {hash_label("fit"), n}));
    const ClassifierModel fitted = fit_classifier(classifier, train, fit_rng);

    if (is_checkpoint(config, n)) {
      std::vector<Preference> predictions;
      predictions.reserve(split.test.size());
      for (std::size_t i : split.test)
        predictions.push_back(fitted.predict_label(all.row(static_cast<Eigen::Index>(i)).transpose()));
      result.records.push_back({fold, model, strategy_name, n, "f1", f1_score(predictions, truths), seed});
    }
    if (n == config.budget) break;

    const std::size_t next = select_next(strategy, classifier, fitted, train, all, unused, rng);
    erase_sorted(unused, next);
    train = train.with(all.row(static_cast<Eigen::Index>(next)).transpose(), samples[next].label);
  }
  return result;
}

std::string metric_text(double v) { return std::isnan(v) ? "NA" : format_double(v); }

double parse_metric(const std::string& s) {
  if (s == "NA") return kNotAvailable;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad metric value '" + s + "'");
  return v;
}

template <typename T>
T parse_unsigned(const std::string& s) {
  T v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

bool ExperimentRecord::available() const { return !std::isnan(metric_value); }

bool ExperimentRecord::operator==(const ExperimentRecord& o) const {
  const bool same_value = (std::isnan(metric_value) && std::isnan(o.metric_value)) || metric_value == o.metric_value;
  return fold == o.fold && model == o.model && strategy == o.strategy && n_train == o.n_train &&
         metric_name == o.metric_name && same_value && seed == o.seed;
}

std::size_t ExperimentData::size(Task task) const {
  return task == Task::regression ? regression.size() : preference.size();
}

ExperimentData load_data(const ExperimentConfig& config) {
  ExperimentData data;
  const std::uint64_t data_seed = derive_seed(config.master_seed, {hash_label("data")});
  if (config.task == Task::regression) {
    data.regression = config.data.empty()
                          ? generate_regression_pool(config.effective_pool_size(), config.hit_oracle,
                                                     config.enemy_space, data_seed)
                                .samples()
                          : load_regression_csv(config.data, config.enemy_space);
  } else {
    data.preference = config.data.empty()
                          ? generate_preference_pool(config.effective_pool_size(), config.preference_oracle,
                                                     config.control_space, data_seed)
                                .samples()
                          : load_preference_csv(config.data, config.control_space);
  }
  const std::size_t n = data.size(config.task);
  const std::size_t n_test = test_count(config.test_fraction, n);
  if (n_test == 0 || n_test >= n || config.budget > n - n_test)
    throw ConfigError("experiment.budget", "budget " + std::to_string(config.budget) + " exceeds the " +
                                               std::to_string(n > n_test ? n - n_test : 0) +
                                               " samples left after the test split");
  return data;
}

FoldSplit split_fold(const ExperimentConfig& config, std::size_t fold, std::size_t n) {
  const std::size_t n_test = test_count(config.test_fraction, n);
  if (n_test + config.seed_size > n) throw std::invalid_argument("split_fold: not enough samples");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(config.master_seed, {hash_label("split"), fold}));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

  FoldSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.seed.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                    order.begin() + static_cast<std::ptrdiff_t>(n_test + config.seed_size));
  split.pool.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + config.seed_size), order.end());
  check_disjoint(split, n);
  return split;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t fold, const std::string& model,
                       const std::string& strategy) {
  return derive_seed(master_seed, {fold, hash_label(model), hash_label(strategy)});
}

FoldResult run_fold(const ExperimentConfig& config, std::size_t fold, const std::string& model,
                    const std::string& strategy, const ExperimentData& data) {
  return config.task == Task::regression ? run_regression(config, fold, model, strategy, data)
                                         : run_classification(config, fold, model, strategy, data);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data, unsigned workers) {
  config.validate();
  struct Job {
    std::size_t fold;
    const std::string* model;
    const std::string* strategy;
  };
  std::vector<Job> tasks;
  for (std::size_t f = 0; f < config.folds; ++f)
    for (const auto& m : config.models)
      for (const auto& s : config.strategies) tasks.push_back({f, &m, &s});

  std::vector<FoldResult> slots(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        slots[i] = run_fold(config, tasks[i].fold, *tasks[i].model, *tasks[i].strategy, data);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Tasks are enumerated in (fold, model, strategy) order and each run emits
  // increasing n_train, so concatenation is already the stable order.
  ExperimentResult result;
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.records.begin(), slot.records.end());
    result.objective_records.insert(result.objective_records.end(), slot.objective_records.begin(),
                                    slot.objective_records.end());
  }
  result.summaries = summarize(result.records, config.window_centers, config.window_halfwidth);
  result.improvements = improvement_over_random(result.records);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  return run_experiment(config, load_data(config), workers);
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records,
                                  const std::vector<std::size_t>& centers, std::size_t halfwidth) {
  std::vector<std::pair<std::string, std::string>> groups;
  for (const auto& r : records) {
    const std::pair<std::string, std::string> key{r.strategy, r.model};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [strategy, model] : groups) {
    for (std::size_t center : centers) {
      const std::size_t lo = center > halfwidth ? center - halfwidth : 0;
      const std::size_t hi = center + halfwidth;
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& r : records) {
        if (r.strategy != strategy || r.model != model || !r.available()) continue;
        if (r.n_train < lo || r.n_train > hi) continue;
        sum += r.metric_value;
        ++count;
      }
      rows.push_back({strategy, model, center, halfwidth, count ? sum / static_cast<double>(count) : kNotAvailable});
    }
  }
  return rows;
}

std::vector<ImprovementRow> improvement_over_random(const std::vector<ExperimentRecord>& records) {
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
    double mean() const { return count ? sum / static_cast<double>(count) : kNotAvailable; }
  };
  std::vector<std::string> models;
  std::vector<std::string> strategies;
  std::map<std::tuple<std::string, std::string, std::size_t>, Acc> acc;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::string> metric;
  for (const auto& r : records) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end())
      strategies.push_back(r.strategy);
    auto& a = acc[{r.model, r.strategy, r.n_train}];
    metric[{r.model, r.strategy, r.n_train}] = r.metric_name;
    if (r.available()) {
      a.sum += r.metric_value;
      ++a.count;
    }
  }
  std::vector<ImprovementRow> rows;
  if (std::find(strategies.begin(), strategies.end(), "random") == strategies.end()) return rows;
  for (const auto& m : models) {
    for (const auto& s : strategies) {
      for (const auto& [key, a] : acc) {
        if (std::get<0>(key) != m || std::get<1>(key) != s) continue;
        const std::size_t n = std::get<2>(key);
        const auto base = acc.find({m, "random", n});
        const double mean = a.mean();
        const double random = base == acc.end() ? kNotAvailable : base->second.mean();
        const bool lower_is_better = metric[key] == "mse";
        const double gain = lower_is_better ? random - mean : mean - random;
        rows.push_back({m, s, n, mean, random, gain});
      }
    }
  }
  return rows;
}

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << "fold,model,strategy,n_train,metric_name,metric_value,seed\n";
  for (const auto& r : records) {
    out << r.fold << ',' << r.model << ',' << r.strategy << ',' << r.n_train << ',' << r.metric_name << ','
        << metric_text(r.metric_value) << ',' << r.seed << '\n';
  }
}

std::vector<ExperimentRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "fold,model,strategy,n_train,metric_name,metric_value,seed")
    throw std::runtime_error("records: unexpected header");
  std::vector<ExperimentRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream fields(line);
    while (std::getline(fields, field, ',')) f.push_back(field);
    if (f.size() != 7) throw std::runtime_error("records line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      records.push_back({parse_unsigned<std::size_t>(f[0]), f[1], f[2], parse_unsigned<std::size_t>(f[3]), f[4],
                         parse_metric(f[5]), parse_unsigned<std::uint64_t>(f[6])});
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<ExperimentRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_records(in);
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "strategy,model,window_center,window_halfwidth,mean_metric\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.model << ',' << r.window_center << ',' << r.window_halfwidth << ','
        << metric_text(r.mean_metric) << '\n';
  }
}

void write_improvements(std::ostream& out, const std::vector<ImprovementRow>& rows) {
  out << "model,strategy,n_train,mean_metric,random_metric,improvement\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.strategy << ',' << r.n_train << ',' << metric_text(r.mean_metric) << ','
        << metric_text(r.random_metric) << ',' << metric_text(r.improvement) << '\n';
  }
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir) {
  if (result.records.empty()) throw std::invalid_argument("emit_outputs: no records");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  auto write = [&](const char* name, auto&& fn) {
    auto out = open_out(out_dir / name);
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + (out_dir / name).string() + "'");
  };
  write("records.csv", [&](std::ostream& o) { write_records(o, result.records); });
  write("summary.csv", [&](std::ostream& o) { write_summary(o, result.summaries); });
  write("improvement.csv", [&](std::ostream& o) { write_improvements(o, result.improvements); });
  write("config_echo.ini", [&](std::ostream& o) { o << to_config_text(config); });
  if (config.task == Task::regression)
    write("objective_records.csv", [&](std::ostream& o) { write_records(o, result.objective_records); });
}

}  // namespace altune

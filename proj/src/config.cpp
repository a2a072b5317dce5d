#include "altune/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include "altune/errors.hpp"

namespace altune {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s) { return static_cast<std::size_t>(parse_uint(s)); }

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& v) {
  return join(v, [](const std::string& s) { return s; });
}

// Replaces the bounds of parameter `index` in `space`.
ParameterSpace with_range(const ParameterSpace& space, std::size_t index, const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw std::invalid_argument("expected 'lower,upper', got '" + text + "'");
  auto specs = space.specs();
  specs[index].lower = parse_real(parts[0]);
  specs[index].upper = parse_real(parts[1]);
  return ParameterSpace(std::move(specs));
}

std::string range_text(const ParameterSpace& space, std::size_t index) {
  return format_double(space[index].lower) + "," + format_double(space[index].upper);
}

struct Entry {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string fmt_size(std::size_t v) { return std::to_string(v); }

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<Entry> table = {
      // [experiment]
      {"experiment", "task",
       [](C& c, S v) {
         if (v == "regression") c.task = Task::regression;
         else if (v == "classification") c.task = Task::classification;
         else throw std::invalid_argument("task must be regression or classification, got '" + v + "'");
       },
       [](const C& c) { return std::string(to_string(c.task)); }},
      {"experiment", "folds", [](C& c, S v) { c.folds = parse_size(v); },
       [](const C& c) { return fmt_size(c.folds); }},
      {"experiment", "seed_size", [](C& c, S v) { c.seed_size = parse_size(v); },
       [](const C& c) { return fmt_size(c.seed_size); }},
      {"experiment", "budget", [](C& c, S v) { c.budget = parse_size(v); },
       [](const C& c) { return fmt_size(c.budget); }},
      {"experiment", "test_fraction", [](C& c, S v) { c.test_fraction = parse_real(v); },
       [](const C& c) { return format_double(c.test_fraction); }},
      {"experiment", "models", [](C& c, S v) { c.models = split_list(v); },
       [](const C& c) { return join_strings(c.models); }},
      {"experiment", "eval_every", [](C& c, S v) { c.eval_every = parse_size(v); },
       [](const C& c) { return fmt_size(c.eval_every); }},
      {"experiment", "master_seed", [](C& c, S v) { c.master_seed = parse_uint(v); },
       [](const C& c) { return std::to_string(c.master_seed); }},
      {"experiment", "pool_size", [](C& c, S v) { c.pool_size = parse_size(v); },
       [](const C& c) { return fmt_size(c.pool_size); }},
      {"experiment", "data", [](C& c, S v) { c.data = v; }, [](const C& c) { return c.data; }},
      {"experiment", "target_hits", [](C& c, S v) { c.target_hits = parse_real(v); },
       [](const C& c) { return format_double(c.target_hits); }},
      {"experiment", "window_centers",
       [](C& c, S v) {
         c.window_centers.clear();
         for (const auto& s : split_list(v)) c.window_centers.push_back(parse_size(s));
       },
       [](const C& c) { return join(c.window_centers, fmt_size); }},
      {"experiment", "window_halfwidth", [](C& c, S v) { c.window_halfwidth = parse_size(v); },
       [](const C& c) { return fmt_size(c.window_halfwidth); }},
      {"experiment", "bullet_speed", [](C& c, S v) { c.enemy_space = with_range(c.enemy_space, 0, v); },
       [](const C& c) { return range_text(c.enemy_space, 0); }},
      {"experiment", "bullet_size", [](C& c, S v) { c.enemy_space = with_range(c.enemy_space, 1, v); },
       [](const C& c) { return range_text(c.enemy_space, 1); }},
      {"experiment", "fire_rate", [](C& c, S v) { c.enemy_space = with_range(c.enemy_space, 2, v); },
       [](const C& c) { return range_text(c.enemy_space, 2); }},
      {"experiment", "drag",
       [](C& c, S v) { c.control_space = with_range(with_range(c.control_space, 0, v), 2, v); },
       [](const C& c) { return range_text(c.control_space, 0); }},
      {"experiment", "thrust",
       [](C& c, S v) { c.control_space = with_range(with_range(c.control_space, 1, v), 3, v); },
       [](const C& c) { return range_text(c.control_space, 1); }},

      // [oracle]
      {"oracle", "max_hits",
       [](C& c, S v) { c.hit_oracle.max_hits = static_cast<int>(parse_uint(v)); },
       [](const C& c) { return std::to_string(c.hit_oracle.max_hits); }},
      {"oracle", "weights",
       [](C& c, S v) {
         const auto parts = split_list(v);
         if (parts.size() != 3) throw std::invalid_argument("expected three weights");
         for (std::size_t i = 0; i < 3; ++i) c.hit_oracle.weights[i] = parse_real(parts[i]);
       },
       [](const C& c) {
         return format_double(c.hit_oracle.weights[0]) + "," + format_double(c.hit_oracle.weights[1]) +
                "," + format_double(c.hit_oracle.weights[2]);
       }},
      {"oracle", "skill_noise_sd", [](C& c, S v) { c.hit_oracle.skill_noise_sd = parse_real(v); },
       [](const C& c) { return format_double(c.hit_oracle.skill_noise_sd); }},
      {"oracle", "steepness", [](C& c, S v) { c.hit_oracle.steepness = parse_real(v); },
       [](const C& c) { return format_double(c.hit_oracle.steepness); }},
      {"oracle", "midpoint", [](C& c, S v) { c.hit_oracle.midpoint = parse_real(v); },
       [](const C& c) { return format_double(c.hit_oracle.midpoint); }},
      {"oracle", "sweet_drag", [](C& c, S v) { c.preference_oracle.sweet_drag = parse_real(v); },
       [](const C& c) { return format_double(c.preference_oracle.sweet_drag); }},
      {"oracle", "sweet_thrust", [](C& c, S v) { c.preference_oracle.sweet_thrust = parse_real(v); },
       [](const C& c) { return format_double(c.preference_oracle.sweet_thrust); }},
      {"oracle", "utility_scale", [](C& c, S v) { c.preference_oracle.utility_scale = parse_real(v); },
       [](const C& c) { return format_double(c.preference_oracle.utility_scale); }},
      {"oracle", "choice_noise", [](C& c, S v) { c.preference_oracle.choice_noise = parse_real(v); },
       [](const C& c) { return format_double(c.preference_oracle.choice_noise); }},

      // [gp]
      {"gp", "signal_variance", [](C& c, S v) { c.gp_signal_variance = parse_real(v); },
       [](const C& c) { return format_double(c.gp_signal_variance); }},
      {"gp", "length_scale", [](C& c, S v) { c.gp_length_scale = parse_real(v); },
       [](const C& c) { return format_double(c.gp_length_scale); }},
      {"gp", "noise_variance", [](C& c, S v) { c.gp_noise_variance = parse_real(v); },
       [](const C& c) { return format_double(c.gp_noise_variance); }},
      {"gp", "optimize", [](C& c, S v) { c.gp_optimize = parse_bool(v); },
       [](const C& c) { return std::string(c.gp_optimize ? "true" : "false"); }},
      {"gp", "restarts", [](C& c, S v) { c.gp_restarts = static_cast<int>(parse_uint(v)); },
       [](const C& c) { return std::to_string(c.gp_restarts); }},
      {"gp", "refit_every", [](C& c, S v) { c.gp_refit_every = parse_size(v); },
       [](const C& c) { return fmt_size(c.gp_refit_every); }},
      {"gp", "laplace_tolerance", [](C& c, S v) { c.gp_classifier.tolerance = parse_real(v); },
       [](const C& c) { return format_double(c.gp_classifier.tolerance); }},
      {"gp", "laplace_max_iterations",
       [](C& c, S v) { c.gp_classifier.max_iterations = static_cast<int>(parse_uint(v)); },
       [](const C& c) { return std::to_string(c.gp_classifier.max_iterations); }},

      // [ksvm]
      {"ksvm", "c", [](C& c, S v) { c.ksvm.c = parse_real(v); },
       [](const C& c) { return format_double(c.ksvm.c); }},
      {"ksvm", "gamma", [](C& c, S v) { c.ksvm.gamma = parse_real(v); },
       [](const C& c) { return format_double(c.ksvm.gamma); }},
      {"ksvm", "tolerance", [](C& c, S v) { c.ksvm.tolerance = parse_real(v); },
       [](const C& c) { return format_double(c.ksvm.tolerance); }},
      {"ksvm", "platt_folds", [](C& c, S v) { c.ksvm.platt_folds = static_cast<int>(parse_uint(v)); },
       [](const C& c) { return std::to_string(c.ksvm.platt_folds); }},

      // [mlp]
      {"mlp", "hidden_sizes",
       [](C& c, S v) {
         c.mlp.hidden_candidates.clear();
         for (const auto& s : split_list(v)) c.mlp.hidden_candidates.push_back(static_cast<int>(parse_uint(s)));
       },
       [](const C& c) { return join(c.mlp.hidden_candidates, [](int h) { return std::to_string(h); }); }},
      {"mlp", "learning_rate", [](C& c, S v) { c.mlp.learning_rate = parse_real(v); },
       [](const C& c) { return format_double(c.mlp.learning_rate); }},
      {"mlp", "epochs", [](C& c, S v) { c.mlp.epochs = static_cast<int>(parse_uint(v)); },
       [](const C& c) { return std::to_string(c.mlp.epochs); }},
      {"mlp", "weight_decay", [](C& c, S v) { c.mlp.weight_decay = parse_real(v); },
       [](const C& c) { return format_double(c.mlp.weight_decay); }},
      {"mlp", "validation_fraction", [](C& c, S v) { c.mlp.validation_fraction = parse_real(v); },
       [](const C& c) { return format_double(c.mlp.validation_fraction); }},

      // [strategy]
      {"strategy", "strategy", [](C& c, S v) { c.strategies = split_list(v); },
       [](const C& c) { return join_strings(c.strategies); }},
      {"strategy", "xi", [](C& c, S v) { c.regression_strategy.xi = parse_real(v); },
       [](const C& c) { return format_double(c.regression_strategy.xi); }},
      {"strategy", "kappa", [](C& c, S v) { c.regression_strategy.kappa = parse_real(v); },
       [](const C& c) { return format_double(c.regression_strategy.kappa); }},
      {"strategy", "kappa_schedule",
       [](C& c, S v) {
         if (v == "constant") c.regression_strategy.kappa_schedule = KappaSchedule::constant;
         else if (v == "srinivas") c.regression_strategy.kappa_schedule = KappaSchedule::srinivas;
         else throw std::invalid_argument("kappa_schedule must be constant or srinivas, got '" + v + "'");
       },
       [](const C& c) {
         return std::string(c.regression_strategy.kappa_schedule == KappaSchedule::constant ? "constant"
                                                                                             : "srinivas");
       }},
      {"strategy", "delta", [](C& c, S v) { c.regression_strategy.delta = parse_real(v); },
       [](const C& c) { return format_double(c.regression_strategy.delta); }},
      {"strategy", "bag_count", [](C& c, S v) { c.classification_strategy.bag_count = parse_size(v); },
       [](const C& c) { return fmt_size(c.classification_strategy.bag_count); }},
      {"strategy", "bag_fraction", [](C& c, S v) { c.classification_strategy.bag_fraction = parse_real(v); },
       [](const C& c) { return format_double(c.classification_strategy.bag_fraction); }},
      {"strategy", "eer_pool_subsample",
       [](C& c, S v) { c.classification_strategy.eer_pool_subsample = parse_size(v); },
       [](const C& c) { return fmt_size(c.classification_strategy.eer_pool_subsample); }},
      {"strategy", "qbb_vote",
       [](C& c, S v) { c.classification_strategy.qbb_vote = parse_qbb_vote_mode(v); },
       [](const C& c) { return std::string(to_string(c.classification_strategy.qbb_vote)); }},
  };
  return table;
}

const char* const kSections[] = {"experiment", "oracle", "gp", "ksvm", "mlp", "strategy"};

}  // namespace

const char* to_string(Task task) {
  return task == Task::regression ? "regression" : "classification";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void ExperimentConfig::resolve() {
  const bool reg = task == Task::regression;
  if (models.empty()) models = reg ? std::vector<std::string>{"gp"} : std::vector<std::string>{"gp", "ksvm", "mlp"};
  if (strategies.empty()) {
    strategies = reg ? std::vector<std::string>{"random", "variance", "pi", "ei", "ucb"}
                     : std::vector<std::string>{"random", "entropy", "qbb_vote", "qbb_prob",
                                                "error_reduction", "variance_reduction"};
  }
  if (pool_size == 0 && data.empty()) pool_size = reg ? 991 : 416;
  if (window_centers.empty())
    window_centers = reg ? std::vector<std::size_t>{65, 280} : std::vector<std::size_t>{100, 200};
}

std::size_t ExperimentConfig::effective_pool_size() const {
  if (pool_size != 0) return pool_size;
  return task == Task::regression ? 991 : 416;
}

KernelParams ExperimentConfig::kernel(Eigen::Index dimension) const {
  return {gp_signal_variance, Eigen::VectorXd::Constant(dimension, gp_length_scale), gp_noise_variance};
}

ClassifierConfig ExperimentConfig::classifier_config(ClassifierKind kind) const {
  ClassifierConfig c;
  c.kind = kind;
  c.gp_kernel = kernel(static_cast<Eigen::Index>(control_space.dimension()));
  c.gp = gp_classifier;
  c.ksvm = ksvm;
  c.mlp = mlp;
  return c;
}

void ExperimentConfig::validate() const {
  std::vector<std::pair<std::string, std::string>> problems;
  auto check = [&](bool ok, const char* key, const std::string& msg) {
    if (!ok) problems.emplace_back(key, msg);
  };
  check(folds >= 2, "experiment.folds", "must be at least 2");
  check(test_fraction > 0.0 && test_fraction < 1.0, "experiment.test_fraction", "must lie in (0, 1)");
  check(seed_size >= 1, "experiment.seed_size", "must be at least 1");
  check(seed_size < budget, "experiment.budget", "must exceed seed_size");
  check(eval_every >= 1, "experiment.eval_every", "must be at least 1");
  check(window_halfwidth >= 0, "experiment.window_halfwidth", "must be non-negative");
  check(target_hits >= 0.0, "experiment.target_hits", "must be non-negative");
  if (data.empty()) {
    const std::size_t n = effective_pool_size();
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    check(n_test >= 1, "experiment.test_fraction", "leaves an empty test split");
    check(n_test < n && budget <= n - n_test, "experiment.budget",
          "exceeds the samples left after the test split (" + std::to_string(n > n_test ? n - n_test : 0) + ")");
  }
  check(!models.empty(), "experiment.models", "must name at least one model");
  for (const auto& m : models) {
    if (task == Task::regression) {
      check(m == "gp", "experiment.models", "regression supports only 'gp', got '" + m + "'");
    } else {
      try {
        parse_classifier_kind(m);
      } catch (const std::invalid_argument& e) {
        problems.emplace_back("experiment.models", e.what());
      }
    }
  }
  check(!strategies.empty(), "strategy.strategy", "must name at least one strategy");
  for (const auto& s : strategies) {
    try {
      if (task == Task::regression) parse_regression_strategy(s);
      else parse_classification_strategy(s);
    } catch (const std::invalid_argument& e) {
      problems.emplace_back("strategy.strategy", e.what());
    }
  }
  auto nested = [&](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      problems.emplace_back(key, e.what());
    }
  };
  nested("oracle", [&] { hit_oracle.validate(); });
  nested("oracle", [&] { preference_oracle.validate(); });
  check(gp_signal_variance > 0.0, "gp.signal_variance", "must be positive");
  check(gp_length_scale > 0.0, "gp.length_scale", "must be positive");
  check(gp_noise_variance > 0.0, "gp.noise_variance", "must be positive");
  check(gp_refit_every >= 1, "gp.refit_every", "must be at least 1");
  check(gp_classifier.tolerance > 0.0, "gp.laplace_tolerance", "must be positive");
  check(gp_classifier.max_iterations >= 1, "gp.laplace_max_iterations", "must be at least 1");
  check(ksvm.c > 0.0, "ksvm.c", "must be positive");
  check(ksvm.gamma >= 0.0, "ksvm.gamma", "must be non-negative (0 selects 1/dimension)");
  check(ksvm.tolerance > 0.0, "ksvm.tolerance", "must be positive");
  check(ksvm.platt_folds >= 2, "ksvm.platt_folds", "must be at least 2");
  check(!mlp.hidden_candidates.empty() &&
            std::all_of(mlp.hidden_candidates.begin(), mlp.hidden_candidates.end(), [](int h) { return h > 0; }),
        "mlp.hidden_sizes", "must list positive sizes");
  check(mlp.learning_rate > 0.0, "mlp.learning_rate", "must be positive");
  check(mlp.validation_fraction >= 0.0 && mlp.validation_fraction < 1.0, "mlp.validation_fraction",
        "must lie in [0, 1)");
  check(mlp.weight_decay >= 0.0, "mlp.weight_decay", "must be non-negative");
  nested("strategy", [&] { regression_strategy.validate(); });
  nested("strategy", [&] { classification_strategy.validate(); });

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& [key, what] : problems) msg += "\n  " + key + ": " + what;
    throw ConfigError(problems.front().first, msg);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections))
        throw ConfigError(section, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    if (section.empty()) throw ConfigError(where, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = std::find_if(entries().begin(), entries().end(), [&](const Entry& e) {
      return section == e.section && key == e.key;
    });
    if (it == entries().end()) throw ConfigError(full, "unknown key");
    if (!seen.insert(full).second) throw ConfigError(full, "set more than once");
    try {
      it->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(full, e.what());
    }
  }
  config.resolve();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const char* section : kSections) {
    if (!out.empty()) out += '\n';
    out += '[';
    out += section;
    out += "]\n";
    for (const auto& e : entries()) {
      if (std::string_view(e.section) != section) continue;
      out += e.key;
      out += " = ";
      out += e.get(config);
      out += '\n';
    }
  }
  return out;
}

}  // namespace altune

#include <algorithm>

#include "json_util.hpp"
#include "litlvm/app.hpp"
#include "litlvm/errors.hpp"

namespace litlvm {

using detail::json;

namespace {

template <class T>
T opt(const json& j, const char* key, T fallback, std::string_view where) {
  return detail::value_or<T, ConfigError>(j, key, fallback, where);
}

template <class T>
T req(const json& j, const char* key, std::string_view where) {
  return detail::as<T, ConfigError>(detail::member<ConfigError>(j, key, where),
                                    std::string(where) + "." + key);
}

// Library validation failures inside a config are config errors.
template <class F>
decltype(auto) as_config_error(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

void parse_penalty(const json& j, PenaltyConfig& pen) {
  detail::reject_unknown_keys<ConfigError>(j, {"lambda1", "lambda2", "lambda_l", "exclude_intercepts"},
                                           "penalty");
  pen.lambda1 = opt(j, "lambda1", pen.lambda1, "penalty");
  pen.lambda2 = opt(j, "lambda2", pen.lambda2, "penalty");
  pen.lambda_l = opt(j, "lambda_l", pen.lambda_l, "penalty");
  pen.exclude_intercepts = opt(j, "exclude_intercepts", pen.exclude_intercepts, "penalty");
  as_config_error([&] { pen.validate(); });
}

void parse_optimizer(const json& j, OptimizerConfig& o) {
  detail::reject_unknown_keys<ConfigError>(
      j, {"learning_rate", "adam_beta1", "adam_beta2", "adam_eps", "max_epochs", "tol", "patience", "seed"},
      "optimizer");
  o.learning_rate = opt(j, "learning_rate", o.learning_rate, "optimizer");
  o.adam_beta1 = opt(j, "adam_beta1", o.adam_beta1, "optimizer");
  o.adam_beta2 = opt(j, "adam_beta2", o.adam_beta2, "optimizer");
  o.adam_eps = opt(j, "adam_eps", o.adam_eps, "optimizer");
  o.max_epochs = opt(j, "max_epochs", o.max_epochs, "optimizer");
  o.tol = opt(j, "tol", o.tol, "optimizer");
  o.patience = opt(j, "patience", o.patience, "optimizer");
  o.seed = opt(j, "seed", o.seed, "optimizer");
  as_config_error([&] { o.validate(); });
}

void parse_grid(const json& j, RunConfig& cfg) {
  detail::reject_unknown_keys<ConfigError>(
      j, {"lambda1", "lambda2", "lambda_l", "learning_rate", "latent_dim", "folds", "metric"}, "grid");
  GridSpec& g = cfg.grid;
  g.lambda1_grid = opt(j, "lambda1", g.lambda1_grid, "grid");
  g.lambda2_grid = opt(j, "lambda2", g.lambda2_grid, "grid");
  g.lambda_l_grid = opt(j, "lambda_l", g.lambda_l_grid, "grid");
  g.lr_grid = opt(j, "learning_rate", g.lr_grid, "grid");
  cfg.grid_d_given = j.contains("latent_dim");
  g.d_grid = opt(j, "latent_dim", g.d_grid, "grid");
  g.folds = opt(j, "folds", g.folds, "grid");
  if (j.contains("metric")) {
    g.metric = as_config_error([&] { return parse_selection_metric(req<std::string>(j, "metric", "grid")); });
  }
  as_config_error([&] { g.validate(); });
}

MaskSpec parse_mask(const json& j) {
  detail::reject_unknown_keys<ConfigError>(j, {"type", "pairs", "group_a", "group_b"}, "mask");
  MaskSpec m;
  const auto type = req<std::string>(j, "type", "mask");
  auto no_extra = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (j.contains(k)) throw ConfigError(std::string("mask type '") + type + "' does not take '" + k + "'");
    }
  };
  if (type == "all") {
    m.kind = MaskSpec::Kind::all;
    no_extra({"pairs", "group_a", "group_b"});
  } else if (type == "none") {
    m.kind = MaskSpec::Kind::none;
    no_extra({"pairs", "group_a", "group_b"});
  } else if (type == "pairs") {
    m.kind = MaskSpec::Kind::pairs;
    no_extra({"group_a", "group_b"});
    for (const auto& pr : detail::member<ConfigError>(j, "pairs", "mask")) {
      const auto names = detail::as<std::vector<std::string>, ConfigError>(pr, "mask.pairs");
      if (names.size() != 2) throw ConfigError("mask.pairs entries must name two features");
      m.pairs.emplace_back(names[0], names[1]);
    }
  } else if (type == "bipartite") {
    m.kind = MaskSpec::Kind::bipartite;
    no_extra({"pairs"});
    m.group_a = req<std::vector<std::string>>(j, "group_a", "mask");
    m.group_b = req<std::vector<std::string>>(j, "group_b", "mask");
  } else {
    throw ConfigError("unknown mask type '" + type + "'");
  }
  return m;
}

SimulationSpec parse_simulation(const json& j) {
  detail::reject_unknown_keys<ConfigError>(
      j,
      {"generator", "n", "p", "d_true", "sigma_eps2", "sigma_s2", "sigma_theta2", "sigma_y2",
       "lvm_kind", "noise", "seed", "split_fraction"},
      "simulation");
  SimulationSpec s;
  const auto gen = opt<std::string>(j, "generator", "linear", "simulation");
  if (gen == "linear") {
    s.generator = Generator::linear;
    s.config.lvm_kind = LvmKind::low_rank;
  } else if (gen == "logistic") {
    s.generator = Generator::logistic;
    s.config.lvm_kind = LvmKind::latent_distance;
  } else {
    throw ConfigError("unknown generator '" + gen + "'");
  }
  SimConfig& c = s.config;
  c.n = opt(j, "n", c.n, "simulation");
  c.p = opt(j, "p", c.p, "simulation");
  c.d_true = opt(j, "d_true", c.d_true, "simulation");
  c.sigma_eps2 = opt(j, "sigma_eps2", c.sigma_eps2, "simulation");
  c.sigma_s2 = opt(j, "sigma_s2", c.sigma_s2, "simulation");
  c.sigma_theta2 = opt(j, "sigma_theta2", c.sigma_theta2, "simulation");
  c.sigma_y2 = opt(j, "sigma_y2", c.sigma_y2, "simulation");
  c.seed = opt(j, "seed", c.seed, "simulation");
  if (j.contains("lvm_kind")) {
    c.lvm_kind = as_config_error([&] { return parse_lvm_kind(req<std::string>(j, "lvm_kind", "simulation")); });
  }
  const auto noise = opt<std::string>(j, "noise", "inside_link", "simulation");
  if (noise == "inside_link") {
    c.noise = NoisePlacement::inside_link;
  } else if (noise == "outside_link") {
    c.noise = NoisePlacement::outside_link;
  } else {
    throw ConfigError("unknown noise placement '" + noise + "'");
  }
  if (j.contains("split_fraction")) {
    s.split_fraction = req<double>(j, "split_fraction", "simulation");
    if (!(*s.split_fraction > 0.0 && *s.split_fraction < 1.0)) {
      throw ConfigError("simulation.split_fraction must lie in (0,1)");
    }
  }
  as_config_error([&] { c.validate(); });
  return s;
}

ExperimentSpec parse_experiment(const json& j) {
  detail::reject_unknown_keys<ConfigError>(j, {"methods", "p", "seeds", "split_fraction", "tune"},
                                           "experiment");
  ExperimentSpec e;
  if (j.contains("methods")) {
    e.methods.clear();
    for (const auto& name : req<std::vector<std::string>>(j, "methods", "experiment")) {
      e.methods.push_back(parse_fit_mode(name));
    }
  }
  e.p_values = req<std::vector<std::size_t>>(j, "p", "experiment");
  e.seeds = req<std::vector<std::uint64_t>>(j, "seeds", "experiment");
  e.split_fraction = opt(j, "split_fraction", e.split_fraction, "experiment");
  e.tune = opt(j, "tune", e.tune, "experiment");
  if (e.methods.empty() || e.p_values.empty() || e.seeds.empty()) {
    throw ConfigError("experiment needs at least one method, p and seed");
  }
  if (!(e.split_fraction > 0.0 && e.split_fraction < 1.0)) {
    throw ConfigError("experiment.split_fraction must lie in (0,1)");
  }
  return e;
}

}  // namespace

InteractionScheme MaskSpec::resolve(const std::vector<std::string>& names) const {
  const std::size_t p = names.size();
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("mask names unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  auto indices = [&](const std::vector<std::string>& group) {
    std::vector<std::size_t> out;
    for (const auto& g : group) out.push_back(index_of(g));
    return out;
  };
  switch (kind) {
    case Kind::all: return InteractionScheme::all_pairs(p);
    case Kind::none: return InteractionScheme::no_pairs(p);
    case Kind::pairs: {
      std::vector<FeaturePair> list;
      for (const auto& [a, b] : pairs) {
        const std::size_t ia = index_of(a);
        const std::size_t ib = index_of(b);
        list.push_back({std::min(ia, ib), std::max(ia, ib)});
      }
      return as_config_error([&] { return InteractionScheme::from_pairs(p, list); });
    }
    case Kind::bipartite: {
      const auto a = indices(group_a);
      const auto b = indices(group_b);
      return as_config_error([&] { return InteractionScheme::bipartite(p, a, b); });
    }
  }
  throw ConfigError("unknown mask kind");
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys<ConfigError>(
      j,
      {"task", "method", "lvm_kind", "latent_dim", "penalty", "optimizer", "grid", "mask", "data",
       "standardize", "simulation", "experiment"},
      "config");

  RunConfig cfg;
  if (j.contains("simulation")) cfg.simulation = parse_simulation(j["simulation"]);
  if (j.contains("task")) {
    cfg.fit.task = as_config_error([&] { return parse_task(req<std::string>(j, "task", "config")); });
  } else if (cfg.simulation) {
    cfg.fit.task = cfg.simulation->generator == Generator::linear ? TaskKind::regression
                                                                   : TaskKind::classification;
  }
  if (cfg.simulation) {
    const TaskKind sim_task = cfg.simulation->generator == Generator::linear ? TaskKind::regression
                                                                              : TaskKind::classification;
    if (sim_task != cfg.fit.task) throw ConfigError("task does not match the simulation generator");
  }

  cfg.method = parse_fit_mode(opt<std::string>(j, "method", "lit_lvm", "config"));
  cfg.fit.lvm_kind = as_config_error(
      [&] { return parse_lvm_kind(opt<std::string>(j, "lvm_kind", "low_rank", "config")); });
  cfg.fit.latent_dim = opt(j, "latent_dim", cfg.fit.latent_dim, "config");
  if (cfg.method == FitMode::lit_lvm && cfg.fit.lvm_kind == LvmKind::none) {
    throw ConfigError("method lit_lvm needs lvm_kind low_rank or latent_distance");
  }
  if (j.contains("penalty")) parse_penalty(j["penalty"], cfg.fit.penalty);
  if (j.contains("optimizer")) parse_optimizer(j["optimizer"], cfg.fit.optimizer);
  if (j.contains("grid")) parse_grid(j["grid"], cfg);
  if (j.contains("mask")) cfg.mask = parse_mask(j["mask"]);
  if (j.contains("standardize")) cfg.standardize = req<bool>(j, "standardize", "config");
  if (j.contains("experiment")) cfg.experiment = parse_experiment(j["experiment"]);

  if (j.contains("data")) {
    const json& d = j["data"];
    detail::reject_unknown_keys<ConfigError>(d, {"path", "target", "time", "event", "features"}, "data");
    cfg.data_path = resolve(base_dir, req<std::string>(d, "path", "data"));
    cfg.columns.target = opt<std::string>(d, "target", cfg.columns.target, "data");
    cfg.columns.time = opt<std::string>(d, "time", cfg.columns.time, "data");
    cfg.columns.event = opt<std::string>(d, "event", cfg.columns.event, "data");
    cfg.columns.features = opt(d, "features", cfg.columns.features, "data");
  }
  cfg.columns.task = cfg.fit.task;
  cfg.fit.model = cfg.method == FitMode::fm ? ModelKind::factorization_machine : ModelKind::interactions;
  cfg.hash = detail::fnv1a_hex(j.dump());
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

void apply_overrides(RunConfig& cfg, const CliOptions& opts) {
  std::string extra;
  if (opts.seed) {
    cfg.fit.optimizer.seed = *opts.seed;
    if (cfg.simulation) cfg.simulation->config.seed = *opts.seed;
    extra += "|seed=" + std::to_string(*opts.seed);
  }
  if (opts.standardize) {
    cfg.standardize = opts.standardize;
    extra += *opts.standardize ? "|standardize=on" : "|standardize=off";
  }
  if (!extra.empty()) cfg.hash = detail::fnv1a_hex(cfg.hash + extra);
}

}  // namespace litlvm

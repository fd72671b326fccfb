#include "litlvm/model_io.hpp"

#include <charconv>

#include "json_util.hpp"
#include "litlvm/csv.hpp"
#include "litlvm/errors.hpp"

namespace litlvm {

using detail::json;

std::string_view to_string(FitMode mode) {
  switch (mode) {
    case FitMode::elastic_net: return "elastic_net";
    case FitMode::lit_lvm: return "lit_lvm";
    case FitMode::fm: return "fm";
  }
  return "unknown";
}

FitMode parse_fit_mode(std::string_view name) {
  if (name == "elastic_net") return FitMode::elastic_net;
  if (name == "lit_lvm") return FitMode::lit_lvm;
  if (name == "fm") return FitMode::fm;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

namespace {

std::string format_version() {
  return std::to_string(SavedModel::kFormatMajor) + "." + std::to_string(SavedModel::kFormatMinor);
}

int major_of(const std::string& version) {
  int major = -1;
  const auto res = std::from_chars(version.data(), version.data() + version.size(), major);
  if (res.ec != std::errc() || res.ptr == version.data() ||
      (res.ptr != version.data() + version.size() && *res.ptr != '.')) {
    throw DataError("malformed format_version '" + version + "'");
  }
  return major;
}

template <class T>
T get(const json& j, const char* key) {
  return detail::as<T, DataError>(detail::member<DataError>(j, key, "model"), key);
}

}  // namespace

std::string SavedModel::serialize() const {
  json j;
  j["format_version"] = format_version();
  j["ordering_version"] = InteractionScheme::kOrderingVersion;
  j["task"] = std::string(to_string(task));
  j["mode"] = std::string(to_string(mode));
  j["lvm_kind"] = std::string(to_string(params.lvm_kind));
  j["feature_names"] = feature_names;

  json mask;
  if (scheme.is_full()) {
    mask["type"] = "all";
  } else {
    mask["type"] = "pairs";
    json pairs = json::array();
    for (const auto& pr : scheme.pairs()) pairs.push_back({pr.j, pr.k});
    mask["pairs"] = std::move(pairs);
  }
  j["mask"] = std::move(mask);

  json p;
  p["has_intercept"] = params.has_intercept;
  p["beta0"] = params.beta0;
  p["beta"] = detail::to_json(params.beta);
  p["theta"] = detail::to_json(params.theta);
  p["latent_dim"] = params.latent_dim();
  p["Z"] = detail::to_json(params.Z);
  p["alpha0"] = params.alpha0;
  j["params"] = std::move(p);

  if (standardization) {
    j["standardization"] = {{"mean", detail::to_json(standardization->mean)},
                            {"scale", detail::to_json(standardization->scale)}};
  } else {
    j["standardization"] = nullptr;
  }
  if (baseline) {
    j["baseline_hazard"] = {{"times", baseline->times}, {"cumhaz", baseline->cumhaz}};
  } else {
    j["baseline_hazard"] = nullptr;
  }
  j["brier_grid"] = brier_grid;
  j["provenance"] = {{"seed", seed}, {"config_hash", config_hash}};
  return j.dump(2) + "\n";
}

SavedModel SavedModel::parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys<DataError>(
      j,
      {"format_version", "ordering_version", "task", "mode", "lvm_kind", "feature_names", "mask",
       "params", "standardization", "baseline_hazard", "brier_grid", "provenance"},
      "model");

  const auto version = get<std::string>(j, "format_version");
  if (major_of(version) != kFormatMajor) {
    throw DataError("model format version " + version + " is not supported (expected major " +
                    std::to_string(kFormatMajor) + ")");
  }
  if (get<int>(j, "ordering_version") != InteractionScheme::kOrderingVersion) {
    throw DataError("model uses an unknown pair ordering");
  }

  SavedModel m;
  try {
    m.task = parse_task(get<std::string>(j, "task"));
    m.mode = parse_fit_mode(get<std::string>(j, "mode"));
    m.params.lvm_kind = parse_lvm_kind(get<std::string>(j, "lvm_kind"));
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  m.feature_names = get<std::vector<std::string>>(j, "feature_names");
  const std::size_t p = m.feature_names.size();

  const json& mask = detail::member<DataError>(j, "mask", "model");
  const auto type = detail::as<std::string, DataError>(detail::member<DataError>(mask, "type", "mask"), "mask.type");
  if (type == "all") {
    m.scheme = InteractionScheme::all_pairs(p);
  } else if (type == "pairs") {
    std::vector<FeaturePair> pairs;
    for (const auto& pr : detail::member<DataError>(mask, "pairs", "mask")) {
      const auto jk = detail::as<std::vector<std::size_t>, DataError>(pr, "mask.pairs");
      if (jk.size() != 2) throw DataError("mask pair must have two indices");
      pairs.push_back({jk[0], jk[1]});
    }
    try {
      m.scheme = InteractionScheme::from_pairs(p, pairs);
    } catch (const Error& e) {
      throw DataError(std::string("bad mask: ") + e.what());
    }
  } else {
    throw DataError("unknown mask type '" + type + "'");
  }

  const json& pj = detail::member<DataError>(j, "params", "model");
  m.params.has_intercept = get<bool>(pj, "has_intercept");
  m.params.beta0 = get<double>(pj, "beta0");
  m.params.beta = detail::vector_from<DataError>(detail::member<DataError>(pj, "beta", "params"), "beta");
  m.params.theta = detail::vector_from<DataError>(detail::member<DataError>(pj, "theta", "params"), "theta");
  const auto d = get<std::size_t>(pj, "latent_dim");
  m.params.Z = detail::matrix_from<DataError>(detail::member<DataError>(pj, "Z", "params"), "Z",
                                              static_cast<Eigen::Index>(d));
  m.params.alpha0 = get<double>(pj, "alpha0");
  try {
    m.params.validate(m.scheme);
  } catch (const Error& e) {
    throw DataError(std::string("inconsistent model parameters: ") + e.what());
  }

  if (const json& s = detail::member<DataError>(j, "standardization", "model"); !s.is_null()) {
    Standardizer st;
    st.mean = detail::vector_from<DataError>(detail::member<DataError>(s, "mean", "standardization"), "mean");
    st.scale = detail::vector_from<DataError>(detail::member<DataError>(s, "scale", "standardization"), "scale");
    if (static_cast<std::size_t>(st.mean.size()) != p || static_cast<std::size_t>(st.scale.size()) != p) {
      throw DataError("standardization statistics do not match the feature count");
    }
    m.standardization = std::move(st);
  }
  if (const json& b = detail::member<DataError>(j, "baseline_hazard", "model"); !b.is_null()) {
    BaselineHazard h;
    h.times = get<std::vector<double>>(b, "times");
    h.cumhaz = get<std::vector<double>>(b, "cumhaz");
    if (h.times.size() != h.cumhaz.size()) throw DataError("baseline hazard arrays differ in length");
    m.baseline = std::move(h);
  }
  m.brier_grid = get<std::vector<double>>(j, "brier_grid");
  const json& prov = detail::member<DataError>(j, "provenance", "model");
  m.seed = get<std::uint64_t>(prov, "seed");
  m.config_hash = get<std::string>(prov, "config_hash");
  return m;
}

void SavedModel::save(const std::filesystem::path& path) const { write_text(path, serialize()); }

SavedModel SavedModel::load(const std::filesystem::path& path) { return parse(read_text(path)); }

Matrix SavedModel::prepare(const Matrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != feature_names.size()) {
    throw DimensionError("expected " + std::to_string(feature_names.size()) + " feature columns");
  }
  return standardization ? standardization->apply(X) : X;
}

Predictions SavedModel::predict(const Matrix& X) const {
  return litlvm::predict(params, prepare(X), scheme, task);
}

Matrix SavedModel::survival(const Vector& scores) const {
  if (task != TaskKind::survival) throw StateError("survival curves need a survival model");
  return survival_curves(scores, baseline, brier_grid);
}

}  // namespace litlvm

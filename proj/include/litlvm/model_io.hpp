#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litlvm/core.hpp"
#include "litlvm/predictors.hpp"

namespace litlvm {

enum class FitMode { elastic_net, lit_lvm, fm };

std::string_view to_string(FitMode mode);
FitMode parse_fit_mode(std::string_view name);

// Everything needed to score new rows. Params live in the standardized
// feature space when `standardization` is set.
struct SavedModel {
  static constexpr int kFormatMajor = 1;
  static constexpr int kFormatMinor = 0;

  TaskKind task = TaskKind::regression;
  FitMode mode = FitMode::elastic_net;
  std::vector<std::string> feature_names;
  InteractionScheme scheme;
  ModelParams params;
  std::optional<Standardizer> standardization;
  std::optional<BaselineHazard> baseline;  // survival only
  std::vector<double> brier_grid;          // survival only
  std::uint64_t seed = 0;
  std::string config_hash;

  // Pretty-printed JSON with sorted keys; save -> load -> save is byte-identical.
  std::string serialize() const;
  // Refuses a different major format version or pair ordering.
  static SavedModel parse(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static SavedModel load(const std::filesystem::path& path);

  // X columns must already be in feature_names order.
  Matrix prepare(const Matrix& X) const;
  Predictions predict(const Matrix& X) const;
  // S(t | x) at brier_grid; StateError unless survival.
  Matrix survival(const Vector& scores) const;
};

}  // namespace litlvm

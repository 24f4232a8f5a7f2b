#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmac/trainer.hpp"

namespace dmac {

/// TrainConfig as a flat JSON object (the `--config` file layout).
nlohmann::json config_to_json(const TrainConfig& cfg);

/// Overrides fields of `cfg` present in `j`. Unknown keys and wrongly typed
/// values throw std::invalid_argument naming the key.
void apply_config_json(TrainConfig& cfg, const nlohmann::json& j);

struct RunSummary {
  std::uint64_t seed = 0;
  std::optional<double> acc;
  std::optional<double> nmi;
  double final_loss = 0.0;
  std::size_t anchors = 0;
  /// max |U − Û| at the end of training; exactly 0 with perturbation disabled.
  double anchor_shift = 0.0;
  std::vector<LossRecord> history;
  std::vector<double> epoch_seconds;

  bool operator==(const RunSummary&) const;
};

struct RunReport {
  nlohmann::json config;
  std::string nmi_normalization = "geometric";
  std::vector<RunSummary> runs;
  std::optional<double> mean_acc;
  std::optional<double> mean_nmi;
  std::map<std::string, std::string> outputs;

  bool operator==(const RunReport&) const;
};

RunSummary summarize(const TrainResult& result, std::uint64_t seed);

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

} // namespace dmac

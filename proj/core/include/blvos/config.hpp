#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "blvos/imgbench.hpp"
#include "blvos/reliability.hpp"
#include "blvos/volt.hpp"

namespace blvos {

/// Every tunable table, with where it came from.
struct ModelTables {
  ElectricalModel electrical;
  /// Calibrated to the anchors.
  AgingParams aging;
  Kernel sharpen = sharpen_kernel();
  Kernel smooth = smooth_kernel();
  /// "default" or the override file path.
  std::string provenance = "default";
};

/// Defaults, then the sections of the override document when given:
/// delays, energy, voltage, vth_anchors, shifter_delays, aging, kernels.
/// Unknown sections or keys are rejected.
ModelTables load_model_tables(const std::optional<std::filesystem::path>& override_file = std::nullopt);
ModelTables apply_overrides(ModelTables base, const nlohmann::json& doc);

/// Resolved tables in the override-file layout.
nlohmann::json tables_json(const ModelTables& t);

inline constexpr int kSchemaVersion = 1;
std::string_view tool_version();

/// Common report envelope: schema, tool version, command, resolved
/// configuration, seed, table provenance and a hash of it all.
nlohmann::json report_envelope(std::string_view command, const nlohmann::json& config, std::uint64_t seed,
                               const ModelTables& tables);

/// Canonical (sorted-key, compact) serialisation used for hashing.
std::string canonical(const nlohmann::json& j);

}  // namespace blvos

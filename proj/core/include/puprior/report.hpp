#pragma once

#include "puprior/calibrate.hpp"
#include "puprior/improve.hpp"
#include "puprior/metrics.hpp"
#include "puprior/pulscar.hpp"
#include "puprior/pulsnar.hpp"

#include <json.hpp>

#include <filesystem>
#include <string_view>

namespace puprior {

/// Project version plus the git description of the build tree.
std::string_view version();

nlohmann::json to_json(const ClassifierConfig& config);
nlohmann::json to_json(const EstimatorConfig& config);
nlohmann::json to_json(const Bandwidth& bandwidth);
/// `include_curve` adds the full alpha grid, error values and slopes.
nlohmann::json to_json(const AlphaEstimate& estimate, bool include_curve = false);
nlohmann::json to_json(const SubproblemEstimate& sub, bool include_curve = false);
nlohmann::json to_json(const SnarAlphaEstimate& estimate, bool include_curves = false);
nlohmann::json to_json(const RepeatSummary& summary);
nlohmann::json to_json(const MetricsReport& metrics);
nlohmann::json to_json(const FlipSchedule& schedule);
nlohmann::json to_json(const ReliabilityDiagram& diagram);
nlohmann::json to_json(const ImprovementResult& result);

/// Writes `doc` indented by two spaces with a trailing newline.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace puprior

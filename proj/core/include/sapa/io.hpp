#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapa/harness.hpp"
#include "sapa/model.hpp"
#include "sapa/params.hpp"
#include "sapa/theory.hpp"

namespace sapa {

using ordered_json = nlohmann::ordered_json;

// ---- files -----------------------------------------------------------------

// Both throw std::runtime_error with the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// ---- time-series CSV ---------------------------------------------------------

// Header exactly `n,E,M_1,...,M_{track_k}`; one row per checkpoint; integer
// fields; '\n' line ends; no trailing separator.
std::string series_to_csv(std::span<const TimeSeriesRow> series, int track_k);
// Strict parse-back of the writer's format (throws std::runtime_error).
std::vector<TimeSeriesRow> series_from_csv(const std::string& text);

// ---- run configuration -------------------------------------------------------

struct RunConfig {
  ModelParams params;
  int replicas = 1;
  int jobs = 1;
  std::string out_dir = ".";
  bool timing = false;  // include wall-clock in summaries (breaks byte-for-byte
                        // reproducibility across machines, so opt-in)
};

ordered_json params_to_json(const ModelParams& params);
ordered_json config_to_json(const RunConfig& config);
// Applies only the keys present; unknown keys throw std::runtime_error.
void apply_json(ModelParams& params, const ordered_json& doc);
void apply_json(RunConfig& config, const ordered_json& doc);

// ---- result documents ----------------------------------------------------------

ordered_json theory_to_json(const TheoryResult& theory);
ordered_json exponent_to_json(const std::optional<ExponentFit>& fit);

// Single-run document: model-parameter echo (scheduling/placement keys are
// deliberately absent so identical runs give identical bytes), theory block,
// final checkpoint with
// ratios, exponent fit, seed; wall_clock_seconds only when timing is on.
ordered_json summary_json(const RunConfig& config, const TheoryResult& theory,
                          std::span<const TimeSeriesRow> series,
                          const std::optional<ExponentFit>& fit,
                          std::optional<double> wall_clock_seconds);

// Ensemble document: model-parameter echo, theory block, per-replica rows (sorted by
// replica id) and ensemble statistics of the final ratios and exponents.
ordered_json ensemble_json(const RunConfig& config, const TheoryResult& theory,
                           std::span<const ReplicaSummary> replicas,
                           std::optional<double> wall_clock_seconds);

// ---- SVG plots ------------------------------------------------------------------

struct PlotOptions {
  enum class Kind { ratio, loglog };
  Kind kind = Kind::ratio;
  // Horizontal reference levels (ratio plot): e.g. the limits x_k*.
  std::vector<double> reference_levels;
  // Reference slope through the last point (loglog plot): e.g. a + d*alpha.
  std::optional<double> reference_slope;
  std::string title;
  int width = 900;
  int height = 560;
};

// Self-contained SVG: axes with decade ticks (x is always log n), one
// polyline per rank, dashed reference lines per the options.
std::string render_series_svg(std::span<const TimeSeriesRow> series, int track_k,
                              const PlotOptions& options);

}  // namespace sapa

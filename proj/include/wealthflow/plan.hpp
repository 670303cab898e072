#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wealthflow/experiments.hpp"
#include "wealthflow/sim_engine.hpp"
#include "wealthflow/timeseries.hpp"

namespace wealthflow {

enum class Analysis { GiniTrace, GiniVsAlpha, RankCorr, Overlap, Autocorr, Relax, Collapse, FitOverlap };

std::string to_string(Analysis analysis);
Analysis parse_analysis(const std::string& text);

// Per-analysis knobs. Durations are rescaled times s = k sigma^2.
struct PlanSettings {
  StationaryProtocol correlations;
  // GiniVsAlpha: burn-in before averaging (hot starts need none) and averaging length.
  double gini_burn_in = 0.0;
  double gini_duration = 40.0;
  // Autocorr: stationary Gini series.
  double autocorr_burn_in = 10.0;
  double autocorr_spacing = 0.01;
  double autocorr_duration = 1000.0;
  AutocorrOptions autocorr;
  std::uint64_t relax_step_cap = 1'000'000;
  // GiniVsAlpha also writes the theory curve on this grid.
  std::vector<double> theory_alphas;
};

struct ExperimentPlan {
  std::string name;
  std::vector<SimConfig> grid;
  std::set<Analysis> analyses;
  std::filesystem::path output_dir;
  std::size_t replicas = 100;
  PlanSettings settings;

  // Throws ValidationError on an empty grid or analysis set.
  void validate() const;
};

struct PointOutcome {
  std::string label;
  SimConfig config;
  bool ok = true;
  int exit_code = 0;
  std::string error;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
};

struct PlanOutcome {
  std::vector<PointOutcome> points;
  std::vector<std::string> plan_files;
  std::vector<std::string> plan_errors;
  double wall_seconds = 0.0;
  int exit_code = 0;  // 0 iff every analysis succeeded
};

// Directory name of a grid point, e.g. "p03_a2_s0.04".
std::string point_label(std::size_t index, const SimConfig& config);

/// Runs every grid point (up to `jobs` at once, 0 = hardware concurrency),
/// each into its own subdirectory, then the cross-point analyses (Collapse,
/// FitOverlap, power-law fits of Autocorr/Relax, the GiniVsAlpha summary).
/// A failing point is recorded and the rest still run. Writes manifest.json.
PlanOutcome run_plan(const ExperimentPlan& plan, unsigned jobs = 0);

struct Recipe {
  std::string name;
  std::string description;
  ExperimentPlan plan;
  bool needs_richlist_input = false;
};

std::vector<Recipe> list_recipes();

std::string library_version();
std::optional<Recipe> find_recipe(const std::string& name);

}  // namespace wealthflow

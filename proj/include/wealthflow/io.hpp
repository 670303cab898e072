#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wealthflow/data_pipeline.hpp"
#include "wealthflow/experiments.hpp"
#include "wealthflow/rank_stats.hpp"
#include "wealthflow/sim_engine.hpp"
#include "wealthflow/timeseries.hpp"

namespace wealthflow {

/// Parses one config record: either a single JSON object or `key=value`
/// lines (blank lines and `#` comments allowed). Keys are exactly the
/// SimConfig fields; anything else is a ValidationError. Missing keys keep
/// the values already in `base`.
SimConfig parse_sim_config(const std::string& text, const SimConfig& base = {});
SimConfig read_sim_config(const std::filesystem::path& path, const SimConfig& base = {});
std::string sim_config_to_json(const SimConfig& config);

// Throw IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Round-trip precision for every number written.
void set_csv_precision(std::ostream& out);

// k,agent_id,wealth,normalized
void write_snapshot_header(std::ostream& out);
void write_snapshot_rows(std::ostream& out, const WealthSnapshot& snapshot);

// time,identity,rank,tied
void write_rankings_csv(std::ostream& out, std::span<const RankingSnapshot> snapshots);
std::vector<RankingSnapshot> read_rankings_csv(std::istream& in);

// k,x_tau_rho,x_overlap,tau,rho,gamma,omega
void write_correlation_csv(std::ostream& out, const CorrelationSeries& series);

// param,value,stderr
void write_fit_csv(std::ostream& out, const FitResult& fit);

// alpha,G
void write_gini_theory_csv(std::ostream& out, std::span<const std::pair<double, double>> rows);

// k,k_sigma2,G
void write_gini_trace_csv(std::ostream& out, std::span<const GiniPoint> trace);

// base_year,target_year,tau,rho,gamma,overlap[,tau_sd,rho_sd]
void write_richlist_csv(std::ostream& out, std::span<const RichListRow> rows, bool with_sd);

/// Numeric columns of a headed CSV, looked up by name. Fields that do not
/// parse as numbers are a ValidationError naming the line.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

NumericTable read_numeric_csv(std::istream& in);

}  // namespace wealthflow

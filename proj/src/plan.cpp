#include "wealthflow/plan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wealthflow/dist_analytics.hpp"
#include "wealthflow/error.hpp"
#include "wealthflow/io.hpp"

namespace wealthflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<Analysis, std::string>& analysis_names() {
  static const std::map<Analysis, std::string> names{
      {Analysis::GiniTrace, "gini-trace"}, {Analysis::GiniVsAlpha, "gini-vs-alpha"},
      {Analysis::RankCorr, "rank-corr"},   {Analysis::Overlap, "overlap"},
      {Analysis::Autocorr, "autocorr"},    {Analysis::Relax, "relax"},
      {Analysis::Collapse, "collapse"},    {Analysis::FitOverlap, "fit-overlap"}};
  return names;
}

using Seconds = std::chrono::duration<double>;

// Writes through a temporary file so a failure never leaves a truncated CSV.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    auto out = open_output(tmp);
    body(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

struct PointData {
  std::optional<CorrelationSeries> correlations;
  std::optional<AutocorrEstimate> autocorr;
  std::optional<RelaxationEstimate> relax;
  std::optional<double> gini_mean;
  std::size_t gini_samples = 0;
};

bool wants(const ExperimentPlan& plan, Analysis a) { return plan.analyses.contains(a); }

PointData run_point(const ExperimentPlan& plan, const SimConfig& config, const fs::path& dir,
                    std::vector<std::string>& files) {
  config.validate();
  PointData data;
  fs::create_directories(dir);
  auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file(dir / name, body);
    files.push_back((dir / name).string());
  };
  const auto& st = plan.settings;

  if (wants(plan, Analysis::GiniTrace)) {
    const auto trace = gini_trace(config);
    emit("gini_trace.csv", [&](std::ostream& out) { write_gini_trace_csv(out, trace); });
  }

  if (wants(plan, Analysis::GiniVsAlpha)) {
    const std::uint64_t burn = st.gini_burn_in > 0.0 ? steps_for(st.gini_burn_in, config.sigma) : 0;
    const std::size_t length = steps_for(st.gini_duration, config.sigma) + 1;
    const auto series = gini_series(config, burn, 1, length);
    double sum = 0.0;
    for (double g : series.values) sum += g;
    data.gini_mean = sum / static_cast<double>(series.values.size());
    data.gini_samples = series.values.size();
    const double theory = config.alpha > 1.0 ? gini_theoretical(config.alpha).value : 1.0;
    emit("gini_vs_alpha.csv", [&](std::ostream& out) {
      out << "alpha,sigma,G_empirical,G_theory,samples\n"
          << config.alpha << ',' << config.sigma << ',' << *data.gini_mean << ',' << theory << ','
          << data.gini_samples << '\n';
    });
  }

  const bool rank = wants(plan, Analysis::RankCorr);
  const bool overlap = wants(plan, Analysis::Overlap) || wants(plan, Analysis::FitOverlap);
  if (rank || overlap) {
    StationaryProtocol protocol = st.correlations;
    if (!rank) protocol.rank_bases = 0;
    data.correlations = stationary_correlations(config, protocol);
    const auto& cs = *data.correlations;
    if (rank) emit("rank_corr.csv", [&](std::ostream& out) { write_correlation_csv(out, cs); });
    if (wants(plan, Analysis::Overlap)) {
      emit("overlap.csv", [&](std::ostream& out) {
        out << "k,x_overlap,omega\n";
        for (const auto& r : cs.rows) out << r.k << ',' << r.x_overlap << ',' << r.omega << '\n';
      });
    }
    if (wants(plan, Analysis::FitOverlap)) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : cs.rows) pts.emplace_back(r.x_overlap, r.omega);
      const auto fit = fit_overlap_decay(pts, cs.top_n, config.n_agents);
      emit("fit_overlap.csv", [&](std::ostream& out) { write_fit_csv(out, fit); });
    }
  }

  if (wants(plan, Analysis::Autocorr)) {
    const std::uint64_t stride = steps_for(st.autocorr_spacing, config.sigma);
    const std::uint64_t burn = steps_for(st.autocorr_burn_in, config.sigma);
    const auto length =
        static_cast<std::size_t>(static_cast<double>(steps_for(st.autocorr_duration, config.sigma)) /
                                 static_cast<double>(stride)) + 1;
    data.autocorr = integrated_autocorr(gini_series(config, burn, stride, length), st.autocorr);
    const auto& a = *data.autocorr;
    emit("autocorr.csv", [&](std::ostream& out) {
      out << "tau_ac,tau_stderr,window,length,step_stride\n"
          << a.tau << ',' << a.tau_stderr << ',' << a.window << ',' << a.length << ',' << stride << '\n';
    });
  }

  if (wants(plan, Analysis::Relax)) {
    SimConfig cold = config;
    cold.start = StartMode::Cold;
    RelaxationOptions opts;
    opts.replicas = plan.replicas;
    opts.step_cap = st.relax_step_cap;
    data.relax = exponential_relaxation_time(cold, gini_theoretical(config.alpha).value, opts);
    const auto& r = *data.relax;
    emit("relax.csv", [&](std::ostream& out) {
      out << "tau_exp,std_error,replicas,censored,step_cap\n"
          << r.mean << ',' << r.std_error << ',' << r.replicas << ',' << r.censored << ',' << r.step_cap
          << '\n';
    });
    emit("relax_replicas.csv", [&](std::ostream& out) {
      out << "replica,first_passage,censored\n";
      for (std::size_t i = 0; i < r.first_passage.size(); ++i) {
        out << i << ',' << r.first_passage[i] << ',' << (r.first_passage[i] > r.step_cap ? 1 : 0) << '\n';
      }
    });
  }
  return data;
}

json config_json(const SimConfig& c) { return json::parse(sim_config_to_json(c)); }

// Cross-point analyses over the points that succeeded.
void run_plan_level(const ExperimentPlan& plan, const std::vector<PointOutcome>& points,
                    const std::vector<PointData>& data, PlanOutcome& outcome) {
  const fs::path& dir = plan.output_dir;
  auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file(dir / name, body);
    outcome.plan_files.push_back((dir / name).string());
  };
  auto guarded = [&](const char* what, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      outcome.plan_errors.push_back(std::string(what) + ": " + e.what());
      outcome.exit_code = std::max(outcome.exit_code, exit_code_for(e));
    }
  };
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].ok) good.push_back(i);
  }

  if (wants(plan, Analysis::GiniVsAlpha)) {
    guarded("gini-vs-alpha", [&] {
      if (!plan.settings.theory_alphas.empty()) {
        std::vector<std::pair<double, double>> rows;
        for (const auto& [alpha, g] : gini_curve(plan.settings.theory_alphas)) rows.emplace_back(alpha, g.value);
        emit("gini_theory.csv", [&](std::ostream& out) { write_gini_theory_csv(out, rows); });
      }
      emit("gini_vs_alpha.csv", [&](std::ostream& out) {
        out << "alpha,sigma,G_empirical,G_theory,samples\n";
        for (auto i : good) {
          const auto& c = points[i].config;
          const double theory = c.alpha > 1.0 ? gini_theoretical(c.alpha).value : 1.0;
          out << c.alpha << ',' << c.sigma << ',' << *data[i].gini_mean << ',' << theory << ','
              << data[i].gini_samples << '\n';
        }
      });
    });
  }

  auto sigma_fit = [&](const char* name, const char* column, auto value_of) {
    guarded(name, [&] {
      std::vector<std::pair<double, double>> pts;
      emit(std::string(name) + "_summary.csv", [&](std::ostream& out) {
        out << "alpha,sigma," << column << ",std_error\n";
        for (auto i : good) {
          const auto [v, se] = value_of(data[i]);
          out << points[i].config.alpha << ',' << points[i].config.sigma << ',' << v << ',' << se << '\n';
          pts.emplace_back(points[i].config.sigma, v);
        }
      });
      if (pts.size() >= 3) {
        const auto fit = fit_power_law(pts);
        emit(std::string("fit_") + name + ".csv", [&](std::ostream& out) { write_fit_csv(out, fit); });
      }
    });
  };
  if (wants(plan, Analysis::Autocorr)) {
    sigma_fit("autocorr", "tau_ac", [](const PointData& d) {
      return std::pair{d.autocorr->tau, d.autocorr->tau_stderr};
    });
  }
  if (wants(plan, Analysis::Relax)) {
    sigma_fit("relax", "tau_exp", [](const PointData& d) {
      return std::pair{d.relax->mean, d.relax->std_error};
    });
  }

  if (wants(plan, Analysis::Collapse)) {
    guarded("collapse", [&] {
      std::vector<LagCurve> tau, rho, omega;
      for (auto i : good) {
        const auto& cs = *data[i].correlations;
        if (wants(plan, Analysis::RankCorr)) {
          tau.push_back(tau_curve(cs, 1));
          rho.push_back(rho_curve(cs, 1));
        }
        omega.push_back(omega_curve(cs, 1));
      }
      emit("collapse.csv", [&](std::ostream& out) {
        out << "statistic,convention,max_pairwise_deviation,x_min,x_max\n";
        auto row = [&](const char* stat, const std::vector<LagCurve>& curves) {
          if (curves.size() < 2) return;
          for (auto conv : {ScalingConvention::TauRho, ScalingConvention::Overlap}) {
            const auto rep = collapse_check(curves, conv);
            out << stat << ',' << to_string(conv) << ',' << rep.max_pairwise_deviation << ','
                << rep.x_min << ',' << rep.x_max << '\n';
          }
        };
        row("tau", tau);
        row("rho", rho);
        row("omega", omega);
      });
    });
  }

  if (wants(plan, Analysis::FitOverlap)) {
    guarded("fit-overlap", [&] {
      if (good.empty()) throw ValidationError("no successful grid point to fit");
      std::vector<std::pair<double, double>> pts;
      const std::size_t n_agents = points[good.front()].config.n_agents;
      for (auto i : good) {
        if (points[i].config.n_agents != n_agents) {
          throw ValidationError("pooled overlap fit needs one N across the grid");
        }
        for (const auto& r : data[i].correlations->rows) pts.emplace_back(r.x_overlap, r.omega);
      }
      const auto fit = fit_overlap_decay(pts, plan.settings.correlations.top_n, n_agents);
      emit("fit_overlap.csv", [&](std::ostream& out) { write_fit_csv(out, fit); });
    });
  }
}

std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

std::string to_string(Analysis analysis) { return analysis_names().at(analysis); }

Analysis parse_analysis(const std::string& text) {
  for (const auto& [a, name] : analysis_names()) {
    if (name == text) return a;
  }
  throw ValidationError("unknown analysis '" + text + "'");
}

void ExperimentPlan::validate() const {
  if (grid.empty()) throw ValidationError("plan '" + name + "': empty grid");
  if (analyses.empty()) throw ValidationError("plan '" + name + "': no analyses");
  if (analyses.contains(Analysis::Collapse) && !analyses.contains(Analysis::RankCorr) &&
      !analyses.contains(Analysis::Overlap)) {
    throw ValidationError("plan '" + name + "': collapse needs rank-corr or overlap");
  }
  if (replicas == 0 && analyses.contains(Analysis::Relax)) {
    throw ValidationError("plan '" + name + "': relaxation needs at least one replica");
  }
}

std::string point_label(std::size_t index, const SimConfig& config) {
  std::ostringstream s;
  s << 'p' << (index < 10 ? "0" : "") << index << "_a" << format_number(config.alpha) << "_s"
    << format_number(config.sigma);
  return s.str();
}

std::string library_version() { return WEALTHFLOW_VERSION; }

PlanOutcome run_plan(const ExperimentPlan& plan, unsigned jobs) {
  plan.validate();
  const auto started = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(plan.output_dir, ec);
  if (ec || !fs::is_directory(plan.output_dir)) {
    throw IoError("cannot create output directory '" + plan.output_dir.string() + "'");
  }

  PlanOutcome outcome;
  const std::size_t n = plan.grid.size();
  outcome.points.resize(n);
  std::vector<PointData> data(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      auto& p = outcome.points[i];
      p.config = plan.grid[i];
      p.label = point_label(i, p.config);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        data[i] = run_point(plan, p.config, plan.output_dir / p.label, p.files);
      } catch (const std::exception& e) {
        p.ok = false;
        p.error = e.what();
        p.exit_code = exit_code_for(e);
      }
      p.wall_seconds = Seconds(std::chrono::steady_clock::now() - t0).count();
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& p : outcome.points) outcome.exit_code = std::max(outcome.exit_code, p.exit_code);

  run_plan_level(plan, outcome.points, data, outcome);
  outcome.wall_seconds = Seconds(std::chrono::steady_clock::now() - started).count();

  json manifest{{"plan", plan.name}, {"version", library_version()}, {"jobs", jobs},
                {"replicas", plan.replicas}, {"wall_seconds", outcome.wall_seconds},
                {"exit_code", outcome.exit_code}};
  manifest["analyses"] = json::array();
  for (auto a : plan.analyses) manifest["analyses"].push_back(to_string(a));
  manifest["points"] = json::array();
  for (const auto& p : outcome.points) {
    manifest["points"].push_back({{"label", p.label},
                                  {"config", config_json(p.config)},
                                  {"seed", p.config.seed},
                                  {"ok", p.ok},
                                  {"exit_code", p.exit_code},
                                  {"error", p.error},
                                  {"wall_seconds", p.wall_seconds},
                                  {"files", p.files}});
  }
  manifest["plan_files"] = outcome.plan_files;
  manifest["plan_errors"] = outcome.plan_errors;
  write_file(plan.output_dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  return outcome;
}

namespace {

std::vector<SimConfig> grid_of(std::initializer_list<double> alphas, std::initializer_list<double> sigmas,
                               StartMode start, std::uint64_t seed = 1) {
  std::vector<SimConfig> grid;
  for (double a : alphas) {
    for (double s : sigmas) {
      SimConfig c;
      c.alpha = a;
      c.sigma = s;
      c.start = start;
      c.seed = seed;
      grid.push_back(c);
    }
  }
  return grid;
}

}  // namespace

std::vector<Recipe> list_recipes() {
  std::vector<Recipe> out;
  const std::initializer_list<double> sigmas{0.02, 0.04, 0.08};

  {
    Recipe r{"fig1a", "stationary Gini vs alpha, simulation and theory", {}, false};
    r.plan.name = r.name;
    r.plan.grid = grid_of({1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0}, sigmas, StartMode::Hot);
    r.plan.analyses = {Analysis::GiniVsAlpha};
    for (double a = 1.1; a <= 6.0 + 1e-9; a += 0.1) r.plan.settings.theory_alphas.push_back(std::round(a * 10) / 10);
    out.push_back(std::move(r));
  }
  auto fig1b = [&](const std::string& name, std::initializer_list<double> s, const char* what) {
    Recipe r{name, what, {}, false};
    r.plan.name = name;
    r.plan.grid = grid_of({2.0}, s, StartMode::Hot);
    r.plan.analyses = {Analysis::Autocorr, Analysis::Relax};
    r.plan.replicas = 100;
    return r;
  };
  out.push_back(fig1b("fig1b", sigmas, "tau_ac and tau_exp vs sigma at alpha = 2"));
  out.push_back(fig1b("fig1b-fast", {0.04, 0.08, 0.16}, "fig1b at desk scale, sigma in {0.04, 0.08, 0.16}"));
  auto trace = [&](const std::string& name, StartMode start, const char* what) {
    Recipe r{name, what, {}, false};
    r.plan.name = name;
    r.plan.grid = grid_of({2.0}, sigmas, start);
    for (auto& c : r.plan.grid) c.steps = steps_for(20.0, c.sigma);
    r.plan.analyses = {Analysis::GiniTrace};
    return r;
  };
  out.push_back(trace("fig1c", StartMode::Cold, "Gini trace vs k sigma^2 from the cold start"));
  out.push_back(trace("fig1d", StartMode::Hot, "Gini trace vs k sigma^2 from the hot start"));
  {
    Recipe r{"fig2", "tau and rho vs k alpha sigma^2, nine (alpha, sigma)", {}, false};
    r.plan.name = r.name;
    r.plan.grid = grid_of({2.0, 3.0, 4.0}, sigmas, StartMode::Hot);
    r.plan.analyses = {Analysis::RankCorr, Analysis::Collapse};
    r.plan.settings.correlations.max_lag = 12.0;
    out.push_back(std::move(r));
  }
  {
    Recipe r{"fig3", "top-100 overlap vs k sigma^2 (alpha - 1) with the decay fit", {}, false};
    r.plan.name = r.name;
    r.plan.grid = grid_of({2.0, 3.0, 4.0}, sigmas, StartMode::Hot);
    r.plan.analyses = {Analysis::Overlap, Analysis::Collapse, Analysis::FitOverlap};
    r.plan.settings.correlations.rank_bases = 0;
    out.push_back(std::move(r));
  }
  {
    Recipe r{"realdata", "rich-list rank correlations and overlap; needs --input year,rank,name CSV", {}, true};
    r.plan.name = r.name;
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<Recipe> find_recipe(const std::string& name) {
  for (auto& r : list_recipes()) {
    if (r.name == name) return r;
  }
  return std::nullopt;
}

}  // namespace wealthflow

// wealthflow command-line front end.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wealthflow/data_pipeline.hpp"
#include "wealthflow/dist_analytics.hpp"
#include "wealthflow/error.hpp"
#include "wealthflow/experiments.hpp"
#include "wealthflow/io.hpp"
#include "wealthflow/plan.hpp"
#include "wealthflow/rank_stats.hpp"
#include "wealthflow/sim_engine.hpp"
#include "wealthflow/timeseries.hpp"

namespace fs = std::filesystem;
using namespace wealthflow;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::string out = "-";
  std::string config;
};

// Config flag overrides shared by the simulation-backed subcommands.
struct ConfigFlags {
  std::optional<std::size_t> n_agents;
  std::optional<double> sigma;
  std::optional<double> alpha;
  std::optional<double> flow_rate;
  std::optional<double> mu;
  std::optional<std::string> start;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> snapshot_every;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n-agents", n_agents, "number of agents N");
    cmd->add_option("--sigma", sigma, "per-step volatility");
    cmd->add_option("--alpha", alpha, "Pareto index");
    cmd->add_option("--flow-rate", flow_rate, "flow rate j (implies alpha unless --alpha is given)");
    cmd->add_option("--mu", mu, "drift of the log growth");
    cmd->add_option("--start", start, "cold or hot");
    cmd->add_option("--steps", steps, "evolution steps");
    cmd->add_option("--snapshot-every", snapshot_every, "snapshot cadence in steps");
  }

  SimConfig resolve(const Globals& g) const {
    SimConfig c;
    if (!g.config.empty()) c = read_sim_config(g.config);
    if (n_agents) c.n_agents = *n_agents;
    if (sigma) c.sigma = *sigma;
    if (alpha) c.alpha = *alpha;
    if (flow_rate) {
      c.flow_rate = *flow_rate;
      if (!alpha) c.alpha = pareto_index(*flow_rate, c.sigma);
    } else if (alpha || sigma) {
      c.flow_rate.reset();
    }
    if (mu) c.mu = *mu;
    if (start) c.start = parse_start_mode(*start);
    if (steps) c.steps = *steps;
    if (snapshot_every) c.snapshot_every = *snapshot_every;
    if (g.seed) c.seed = *g.seed;
    c.validate();
    return c;
  }
};

struct ProtocolFlags {
  StationaryProtocol p;

  void attach(CLI::App* cmd) {
    cmd->add_option("--burn-in", p.burn_in, "burn-in, in units of k sigma^2")->capture_default_str();
    cmd->add_option("--duration", p.duration, "measured span, in units of k sigma^2")->capture_default_str();
    cmd->add_option("--spacing", p.snapshot_spacing, "snapshot spacing, in units of k sigma^2")
        ->capture_default_str();
    cmd->add_option("--max-lag", p.max_lag, "largest lag, in units of k sigma^2")->capture_default_str();
    cmd->add_option("--top-n", p.top_n, "top-n list length for overlaps")->capture_default_str();
    cmd->add_option("--rank-bases", p.rank_bases, "base snapshots for tau/rho/gamma")->capture_default_str();
  }
};

// Output stream: a file or standard output for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path == "-" || path.empty()) {
      set_csv_precision(std::cout);
    } else {
      file_ = std::make_unique<std::ofstream>(open_output(path));
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

NumericTable load_table(const std::string& path) {
  if (path == "-") return read_numeric_csv(std::cin);
  auto in = open_input(path);
  return read_numeric_csv(in);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw ValidationError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_simulate(const Globals& g, const ConfigFlags& f, const std::string& what) {
  const SimConfig c = f.resolve(g);
  Output out(g.out);
  if (what == "snapshots") {
    write_snapshot_header(out.stream());
    run_streaming(c, [&](const AgentEnsemble& e) { write_snapshot_rows(out.stream(), take_snapshot(e)); });
  } else if (what == "gini") {
    write_gini_trace_csv(out.stream(), gini_trace(c));
  } else if (what == "rankings") {
    out.stream() << "time,identity,rank,tied\n";
    run_streaming(c, [&](const AgentEnsemble& e) {
      const RankingSnapshot s = ranks_from_wealth(take_snapshot(e));
      for (const auto& r : s.entries) {
        out.stream() << s.time_label << ',' << r.identity << ',' << r.rank << ",0\n";
      }
    });
  } else {
    throw ValidationError("--what must be snapshots, gini or rankings");
  }
  out.finish();
  return 0;
}

int cmd_gini_theory(const Globals& g, const std::string& alphas, const std::string& input) {
  std::vector<double> grid;
  if (!input.empty()) {
    grid = load_table(input).column("alpha");
  } else {
    grid = parse_list(alphas);
  }
  std::vector<std::pair<double, double>> rows;
  for (const auto& [a, v] : gini_curve(grid)) rows.emplace_back(a, v.value);
  Output out(g.out);
  write_gini_theory_csv(out.stream(), rows);
  out.finish();
  return 0;
}

struct AutocorrFlags {
  std::string input;
  std::string column = "G";
  std::uint64_t stride = 1;
  double burn_in = 10.0;
  double spacing = 0.01;
  double duration = 1000.0;
  double window_factor = 6.0;
};

int cmd_autocorr(const Globals& g, const ConfigFlags& f, const AutocorrFlags& a) {
  AutocorrOptions opts;
  opts.window_factor = a.window_factor;
  ScalarSeries series;
  if (!a.input.empty()) {
    series = {load_table(a.input).column(a.column), a.stride};
  } else {
    const SimConfig c = f.resolve(g);
    const std::uint64_t stride = steps_for(a.spacing, c.sigma);
    const auto length = static_cast<std::size_t>(steps_for(a.duration, c.sigma) / stride) + 1;
    series = gini_series(c, steps_for(a.burn_in, c.sigma), stride, length);
  }
  const auto est = integrated_autocorr(series, opts);
  Output out(g.out);
  out.stream() << "tau_ac,tau_stderr,window,length,step_stride\n"
               << est.tau << ',' << est.tau_stderr << ',' << est.window << ',' << est.length << ','
               << series.step_stride << '\n';
  out.finish();
  return 0;
}

int cmd_relax(const Globals& g, const ConfigFlags& f, std::size_t replicas, std::uint64_t cap,
              std::optional<double> target) {
  SimConfig c = f.resolve(g);
  c.start = StartMode::Cold;
  RelaxationOptions opts;
  opts.replicas = replicas;
  opts.step_cap = cap;
  opts.jobs = g.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : g.jobs;
  const double goal = target ? *target : gini_theoretical(c.alpha).value;
  const auto r = exponential_relaxation_time(c, goal, opts);
  Output out(g.out);
  out.stream() << "alpha,sigma,target,tau_exp,std_error,replicas,censored,step_cap\n"
               << c.alpha << ',' << c.sigma << ',' << goal << ',' << r.mean << ',' << r.std_error << ','
               << r.replicas << ',' << r.censored << ',' << r.step_cap << '\n';
  out.finish();
  if (r.censored > 0) std::cerr << r.censored << " of " << r.replicas << " replicas censored at step cap\n";
  return 0;
}

std::vector<RankingSnapshot> load_rankings(const std::string& path) {
  if (path == "-") return read_rankings_csv(std::cin);
  auto in = open_input(path);
  return read_rankings_csv(in);
}

int cmd_rank_corr(const Globals& g, const ConfigFlags& f, const ProtocolFlags& p, const std::string& input,
                  std::optional<std::int64_t> base) {
  Output out(g.out);
  if (!input.empty()) {
    const auto snaps = load_rankings(input);
    if (snaps.empty()) throw ValidationError("rankings file has no rows");
    const RankingSnapshot* b = &snaps.front();
    if (base) {
      b = nullptr;
      for (const auto& s : snaps) {
        if (s.time_label == *base) b = &s;
      }
      if (!b) throw ValidationError("base time " + std::to_string(*base) + " not in the rankings");
    }
    out.stream() << "base,time,tau,rho,gamma\n";
    for (const auto& s : snaps) {
      const auto sample = align(*b, s);
      const bool ties = sample.allow_ties;
      const double nan = std::nan("");
      out.stream() << b->time_label << ',' << s.time_label << ',' << (ties ? nan : kendall_tau(sample)) << ','
                   << (ties ? nan : spearman_rho(sample)) << ',' << goodman_kruskal_gamma(sample) << '\n';
    }
  } else {
    write_correlation_csv(out.stream(), stationary_correlations(f.resolve(g), p.p));
  }
  out.finish();
  return 0;
}

int cmd_overlap(const Globals& g, const ConfigFlags& f, ProtocolFlags p, const std::string& input) {
  Output out(g.out);
  if (!input.empty()) {
    const auto snaps = load_rankings(input);
    const auto series = mean_overlap_series(snaps, p.p.top_n);
    out.stream() << "k,omega\n";
    for (std::size_t k = 0; k < series.size(); ++k) out.stream() << k << ',' << series[k] << '\n';
  } else {
    p.p.rank_bases = 0;
    const auto cs = stationary_correlations(f.resolve(g), p.p);
    out.stream() << "k,x_overlap,omega\n";
    for (const auto& r : cs.rows) out.stream() << r.k << ',' << r.x_overlap << ',' << r.omega << '\n';
  }
  out.finish();
  return 0;
}

std::vector<std::pair<double, double>> xy(const NumericTable& t, const std::string& x, const std::string& y) {
  const auto& xs = t.column(x);
  const auto& ys = t.column(y);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isnan(xs[i]) && !std::isnan(ys[i])) pts.emplace_back(xs[i], ys[i]);
  }
  return pts;
}

int cmd_fit_overlap(const Globals& g, const std::vector<std::string>& inputs, const std::string& xcol,
                    const std::string& ycol, std::size_t top_n, std::size_t n_agents) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& in : inputs) {
    const auto part = xy(load_table(in), xcol, ycol);
    pts.insert(pts.end(), part.begin(), part.end());
  }
  const auto fit = fit_overlap_decay(pts, top_n, n_agents);
  Output out(g.out);
  write_fit_csv(out.stream(), fit);
  out.finish();
  return 0;
}

int cmd_fit_power(const Globals& g, const std::string& input, const std::string& xcol, const std::string& ycol) {
  const auto fit = fit_power_law(xy(load_table(input), xcol, ycol));
  Output out(g.out);
  write_fit_csv(out.stream(), fit);
  out.finish();
  return 0;
}

// FILE:ALPHA:SIGMA
LagCurve parse_curve_spec(const std::string& spec, const std::string& column, std::uint64_t min_lag) {
  const auto c2 = spec.rfind(':');
  const auto c1 = c2 == std::string::npos ? c2 : spec.rfind(':', c2 - 1);
  if (c1 == std::string::npos) throw ValidationError("--curve expects FILE:ALPHA:SIGMA, got '" + spec + "'");
  const std::string file = spec.substr(0, c1);
  const auto params = parse_list(spec.substr(c1 + 1, c2 - c1 - 1) + "," + spec.substr(c2 + 1));
  const auto table = load_table(file);
  LagCurve curve{file, params[0], params[1], {}, {}};
  const auto& k = table.column("k");
  const auto& v = table.column(column);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < static_cast<double>(min_lag) || std::isnan(v[i])) continue;
    curve.lags.push_back(k[i]);
    curve.values.push_back(v[i]);
  }
  return curve;
}

int cmd_collapse(const Globals& g, const std::vector<std::string>& specs, const std::string& column,
                 const std::string& convention, double x_limit, std::uint64_t min_lag) {
  std::vector<LagCurve> curves;
  for (const auto& s : specs) curves.push_back(parse_curve_spec(s, column, min_lag));
  const auto report = collapse_check(curves, parse_scaling_convention(convention), x_limit);
  Output out(g.out);
  out.stream() << "first,second,max_abs_deviation,at_x\n";
  for (const auto& p : report.pairs) {
    out.stream() << curves[p.first].label << ',' << curves[p.second].label << ',' << p.max_abs_deviation << ','
                 << p.at_x << '\n';
  }
  out.finish();
  std::cerr << "max pairwise deviation " << report.max_pairwise_deviation << " over x in [" << report.x_min
            << ", " << report.x_max << "] (" << to_string(report.convention) << ")\n";
  return 0;
}

struct RichListFlags {
  std::string input;
  std::string aliases;
  std::optional<int> base_year;
  std::size_t completion_seeds = 1;
  std::size_t top_n = 0;
  std::string overlap_out;
};

AnnualLists load_richlists(const RichListFlags& r) {
  AliasMap aliases;
  if (!r.aliases.empty()) {
    auto in = open_input(r.aliases);
    aliases = read_alias_csv(in);
  }
  auto in = open_input(r.input);
  return ingest(read_richlist_csv(in, r.aliases.empty() ? nullptr : &aliases));
}

int cmd_ingest(const Globals& g, const RichListFlags& r) {
  const auto lists = load_richlists(r);
  const auto full = build_full_set(lists);
  RichListOptions opts;
  opts.seed = g.seed.value_or(1);
  opts.completion_seeds = r.completion_seeds;
  opts.top_n = r.top_n;
  const int base = r.base_year.value_or(lists.begin()->first);
  const auto rows = richlist_correlations(lists, base, opts);
  Output out(g.out);
  write_richlist_csv(out.stream(), rows, r.completion_seeds > 1);
  out.finish();
  if (!r.overlap_out.empty()) {
    std::size_t n = r.top_n;
    if (n == 0) {
      n = lists.begin()->second.size();
      for (const auto& [y, l] : lists) n = std::min(n, l.size());
    }
    const auto series = mean_overlap_series(raw_rankings(lists, full), n);
    auto o = open_output(r.overlap_out);
    o << "k,omega\n";
    for (std::size_t k = 0; k < series.size(); ++k) o << k << ',' << series[k] << '\n';
  }
  std::cerr << lists.size() << " annual lists, full set M = " << full.size() << '\n';
  return 0;
}

int cmd_recipe(Globals g, const std::string& name, bool list, const RichListFlags& r) {
  if (list || name.empty()) {
    for (const auto& rec : list_recipes()) std::cout << rec.name << "\t" << rec.description << '\n';
    return 0;
  }
  auto recipe = find_recipe(name);
  if (!recipe) throw ValidationError("unknown recipe '" + name + "' (try --list)");
  if (recipe->needs_richlist_input) {
    if (r.input.empty()) throw ValidationError("recipe '" + name + "' needs --input year,rank,name CSV");
    const fs::path dir = g.out == "-" ? fs::path(name) : fs::path(g.out);
    fs::create_directories(dir);
    RichListFlags rr = r;
    rr.overlap_out = (dir / "overlap_series.csv").string();
    g.out = (dir / "richlist_correlations.csv").string();
    return cmd_ingest(g, rr);
  }
  ExperimentPlan plan = recipe->plan;
  plan.output_dir = g.out == "-" ? fs::path(name) : fs::path(g.out);
  SimConfig base;
  if (!g.config.empty()) base = read_sim_config(g.config);
  for (auto& c : plan.grid) {
    if (!g.config.empty()) c.n_agents = base.n_agents;
    if (g.seed) c.seed = *g.seed;
  }
  const auto outcome = run_plan(plan, g.jobs);
  for (const auto& p : outcome.points) {
    if (!p.ok) std::cerr << p.label << ": " << p.error << '\n';
  }
  for (const auto& e : outcome.plan_errors) std::cerr << e << '\n';
  std::cerr << "wrote " << plan.output_dir.string() << "/manifest.json\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wealthflow: mean-field wealth dynamics, rank statistics and rich-list analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", library_version());

  Globals g;
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "worker threads, 0 = all cores");
  app.add_option("--out", g.out, "output file, or directory for recipes; '-' is stdout");
  app.add_option("--config", g.config, "SimConfig file (JSON object or key=value lines)");

  ConfigFlags cf;
  ProtocolFlags pf;

  auto* simulate = app.add_subcommand("simulate", "run the model and stream snapshots");
  cf.attach(simulate);
  std::string what = "snapshots";
  simulate->add_option("--what", what, "snapshots, gini or rankings")->capture_default_str();

  auto* gini = app.add_subcommand("gini-theory", "stationary Gini coefficient over an alpha grid");
  std::string alphas = "1.5,2,3,4";
  std::string gini_input;
  gini->add_option("--alphas", alphas, "comma-separated alpha values")->capture_default_str();
  gini->add_option("--input", gini_input, "CSV with an alpha column");

  auto* autocorr = app.add_subcommand("autocorr", "integrated autocorrelation time of a series");
  cf.attach(autocorr);
  AutocorrFlags af;
  autocorr->add_option("--input", af.input, "CSV series; without it a stationary Gini series is simulated");
  autocorr->add_option("--column", af.column, "series column")->capture_default_str();
  autocorr->add_option("--stride", af.stride, "steps between samples of --input")->capture_default_str();
  autocorr->add_option("--burn-in", af.burn_in, "k sigma^2 discarded")->capture_default_str();
  autocorr->add_option("--spacing", af.spacing, "k sigma^2 between samples")->capture_default_str();
  autocorr->add_option("--duration", af.duration, "k sigma^2 measured")->capture_default_str();
  autocorr->add_option("--window-factor", af.window_factor, "self-consistent window constant")
      ->capture_default_str();

  auto* relax = app.add_subcommand("relax", "exponential relaxation time from cold starts");
  cf.attach(relax);
  std::size_t replicas = 100;
  std::uint64_t step_cap = 1'000'000;
  std::optional<double> target;
  relax->add_option("--replicas", replicas, "independent replicas")->capture_default_str();
  relax->add_option("--step-cap", step_cap, "censoring cap in steps")->capture_default_str();
  relax->add_option("--target", target, "Gini threshold (default: stationary value)");

  auto* rank = app.add_subcommand("rank-corr", "tau, rho and gamma vs lag (simulated) or vs a base time");
  cf.attach(rank);
  pf.attach(rank);
  std::string rank_input;
  std::optional<std::int64_t> base_time;
  rank->add_option("--input", rank_input, "rankings CSV time,identity,rank,tied");
  rank->add_option("--base", base_time, "base time label for --input (default: first)");

  auto* overlap = app.add_subcommand("overlap", "mean top-n overlap vs lag");
  cf.attach(overlap);
  ProtocolFlags of;
  of.attach(overlap);
  std::string overlap_input;
  overlap->add_option("--input", overlap_input, "rankings CSV time,identity,rank,tied");

  auto* fit_ov = app.add_subcommand("fit-overlap", "fit the overlap decay law for A and B");
  std::vector<std::string> fit_inputs;
  std::string fx = "x_overlap", fy = "omega";
  std::size_t fit_top_n = 100, fit_n_agents = 10000;
  fit_ov->add_option("--input", fit_inputs, "CSV files, pooled")->required();
  fit_ov->add_option("--x", fx, "abscissa column")->capture_default_str();
  fit_ov->add_option("--y", fy, "overlap column")->capture_default_str();
  fit_ov->add_option("--top-n", fit_top_n, "n")->capture_default_str();
  fit_ov->add_option("--n-agents", fit_n_agents, "N")->capture_default_str();

  auto* fit_pw = app.add_subcommand("fit-power", "log-log power-law fit value = prefactor * x^-exponent");
  std::string pw_input, px = "sigma", py = "value";
  fit_pw->add_option("--input", pw_input, "CSV file")->required();
  fit_pw->add_option("--x", px, "abscissa column")->capture_default_str();
  fit_pw->add_option("--y", py, "value column")->capture_default_str();

  auto* collapse = app.add_subcommand("collapse", "scaling-collapse deviation of lag curves");
  std::vector<std::string> curve_specs;
  std::string col = "tau", conv = "tau-rho";
  double x_limit = 0.0;
  std::uint64_t min_lag = 1;
  collapse->add_option("--curve", curve_specs, "FILE:ALPHA:SIGMA with a k column, repeatable")->required();
  collapse->add_option("--column", col, "value column")->capture_default_str();
  collapse->add_option("--convention", conv, "tau-rho (k alpha sigma^2) or overlap (k sigma^2 (alpha-1))")
      ->capture_default_str();
  collapse->add_option("--x-limit", x_limit, "cap on the compared x range, 0 = none");
  collapse->add_option("--min-lag", min_lag, "smallest k used")->capture_default_str();

  auto* ingest_cmd = app.add_subcommand("ingest-richlist", "rank correlations of annual rich lists");
  RichListFlags rf;
  ingest_cmd->add_option("--input", rf.input, "CSV year,rank,name")->required();
  ingest_cmd->add_option("--aliases", rf.aliases, "CSV alias,canonical");
  ingest_cmd->add_option("--base-year", rf.base_year, "default: first year");
  ingest_cmd->add_option("--completion-seeds", rf.completion_seeds, "random completions averaged")
      ->capture_default_str();
  ingest_cmd->add_option("--top-n", rf.top_n, "overlap list length, 0 = shortest list");
  ingest_cmd->add_option("--overlap-out", rf.overlap_out, "also write the mean overlap series k,omega");

  auto* recipe = app.add_subcommand("recipe", "run a built-in experiment plan");
  std::string recipe_name;
  bool list = false;
  RichListFlags rr;
  recipe->add_option("name", recipe_name, "recipe name");
  recipe->add_flag("--list", list, "list recipes");
  recipe->add_option("--input", rr.input, "rich-list CSV for realdata");
  recipe->add_option("--aliases", rr.aliases, "alias map for realdata");
  recipe->add_option("--base-year", rr.base_year, "base year for realdata");
  recipe->add_option("--completion-seeds", rr.completion_seeds, "random completions for realdata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(g, cf, what);
    if (*gini) return cmd_gini_theory(g, alphas, gini_input);
    if (*autocorr) return cmd_autocorr(g, cf, af);
    if (*relax) return cmd_relax(g, cf, replicas, step_cap, target);
    if (*rank) return cmd_rank_corr(g, cf, pf, rank_input, base_time);
    if (*overlap) return cmd_overlap(g, cf, of, overlap_input);
    if (*fit_ov) return cmd_fit_overlap(g, fit_inputs, fx, fy, fit_top_n, fit_n_agents);
    if (*fit_pw) return cmd_fit_power(g, pw_input, px, py);
    if (*collapse) return cmd_collapse(g, curve_specs, col, conv, x_limit, min_lag);
    if (*ingest_cmd) return cmd_ingest(g, rf);
    if (*recipe) return cmd_recipe(g, recipe_name, list, rr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 1;
}

#include "wealthflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "wealthflow/error.hpp"

namespace wealthflow {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  // strtod accepts inf/nan spellings; validate() rejects them later where it matters
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ValidationError("config: '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

// Applies one key; returns false for unknown keys.
bool apply_key(SimConfig& c, const std::string& key, const std::string& value) {
  if (key == "n_agents") {
    c.n_agents = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "sigma") {
    c.sigma = parse_double(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
  } else if (key == "flow_rate") {
    if (value == "null" || value.empty()) {
      c.flow_rate.reset();
    } else {
      c.flow_rate = parse_double(key, value);
    }
  } else if (key == "mu") {
    c.mu = parse_double(key, value);
  } else if (key == "start") {
    c.start = parse_start_mode(value);
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "steps") {
    c.steps = parse_unsigned(key, value);
  } else if (key == "snapshot_every") {
    c.snapshot_every = parse_unsigned(key, value);
  } else {
    return false;
  }
  return true;
}

std::string json_scalar(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "null";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  }
  throw ValidationError("config: '" + key + "' must be a scalar");
}

}  // namespace

SimConfig parse_sim_config(const std::string& text, const SimConfig& base) {
  std::map<std::string, std::string> entries;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) entries[key] = json_scalar(key, value);
  } else {
    std::istringstream in(body);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
      }
      const std::string key = trim(line.substr(0, eq));
      if (entries.contains(key)) throw ValidationError("config: duplicate key '" + key + "'");
      entries[key] = trim(line.substr(eq + 1));
    }
  }

  SimConfig c = base;
  for (const auto& [key, value] : entries) {
    if (!apply_key(c, key, value)) throw ValidationError("config: unknown key '" + key + "'");
  }
  // A record that gives only the flow rate implies alpha.
  if (entries.contains("flow_rate") && !entries.contains("alpha") && c.flow_rate) {
    c.alpha = pareto_index(*c.flow_rate, c.sigma);
  }
  c.validate();
  return c;
}

SimConfig read_sim_config(const std::filesystem::path& path, const SimConfig& base) {
  return parse_sim_config(read_text(path), base);
}

std::string sim_config_to_json(const SimConfig& c) {
  json j{{"n_agents", c.n_agents}, {"sigma", c.sigma},       {"alpha", c.alpha},
         {"mu", c.mu},             {"start", to_string(c.start)}, {"seed", c.seed},
         {"steps", c.steps},       {"snapshot_every", c.snapshot_every}};
  j["flow_rate"] = c.flow_rate ? json(*c.flow_rate) : json(nullptr);
  return j.dump();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  set_csv_precision(out);
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void set_csv_precision(std::ostream& out) { out.precision(std::numeric_limits<double>::max_digits10); }

void write_snapshot_header(std::ostream& out) { out << "k,agent_id,wealth,normalized\n"; }

void write_snapshot_rows(std::ostream& out, const WealthSnapshot& s) {
  set_csv_precision(out);
  for (std::size_t a = 0; a < s.wealth.size(); ++a) {
    out << s.time_index << ',' << a << ',' << s.wealth[a] << ',' << s.normalized[a] << '\n';
  }
}

void write_rankings_csv(std::ostream& out, std::span<const RankingSnapshot> snapshots) {
  out << "time,identity,rank,tied\n";
  for (const auto& s : snapshots) {
    for (const auto& e : s.entries) {
      out << s.time_label << ',' << e.identity << ',' << e.rank << ',' << (e.tied ? 1 : 0) << '\n';
    }
  }
}

std::vector<RankingSnapshot> read_rankings_csv(std::istream& in) {
  const NumericTable t = read_numeric_csv(in);
  for (const char* name : {"time", "identity", "rank", "tied"}) {
    if (!t.has(name)) throw ValidationError(std::string("rankings CSV: missing column '") + name + "'");
  }
  const auto& time = t.column("time");
  const auto& id = t.column("identity");
  const auto& rank = t.column("rank");
  const auto& tied = t.column("tied");
  std::vector<RankingSnapshot> out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto label = static_cast<std::int64_t>(time[i]);
    if (out.empty() || out.back().time_label != label) {
      out.push_back({label, {}});
    }
    if (id[i] < 0 || (tied[i] != 0.0 && tied[i] != 1.0)) {
      throw ValidationError("rankings CSV row " + std::to_string(i + 2) + ": bad identity or tied flag");
    }
    out.back().entries.push_back({static_cast<Identity>(id[i]), static_cast<std::int64_t>(rank[i]),
                                  tied[i] == 1.0});
  }
  for (const auto& s : out) s.validate();
  return out;
}

void write_correlation_csv(std::ostream& out, const CorrelationSeries& series) {
  set_csv_precision(out);
  out << "k,x_tau_rho,x_overlap,tau,rho,gamma,omega\n";
  for (const auto& r : series.rows) {
    out << r.k << ',' << r.x_tau_rho << ',' << r.x_overlap << ',' << r.tau << ',' << r.rho << ','
        << r.gamma << ',' << r.omega << '\n';
  }
}

void write_fit_csv(std::ostream& out, const FitResult& fit) {
  set_csv_precision(out);
  out << "param,value,stderr\n";
  for (const auto& p : fit.params) out << p.name << ',' << p.value << ',' << p.std_error << '\n';
}

void write_gini_theory_csv(std::ostream& out, std::span<const std::pair<double, double>> rows) {
  set_csv_precision(out);
  out << "alpha,G\n";
  for (const auto& [alpha, g] : rows) out << alpha << ',' << g << '\n';
}

void write_gini_trace_csv(std::ostream& out, std::span<const GiniPoint> trace) {
  set_csv_precision(out);
  out << "k,k_sigma2,G\n";
  for (const auto& p : trace) out << p.k << ',' << p.k_sigma2 << ',' << p.gini << '\n';
}

void write_richlist_csv(std::ostream& out, std::span<const RichListRow> rows, bool with_sd) {
  set_csv_precision(out);
  out << "base_year,target_year,tau,rho,gamma,overlap" << (with_sd ? ",tau_sd,rho_sd" : "") << '\n';
  for (const auto& r : rows) {
    out << r.base_year << ',' << r.target_year << ',' << r.tau << ',' << r.rho << ',' << r.gamma << ','
        << r.overlap;
    if (with_sd) out << ',' << r.tau_sd << ',' << r.rho_sd;
    out << '\n';
  }
}

const std::vector<double>& NumericTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("CSV: no column named '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

bool NumericTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

NumericTable read_numeric_csv(std::istream& in) {
  NumericTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV: empty input");
  {
    std::istringstream h(line);
    std::string name;
    while (std::getline(h, name, ',')) t.header.push_back(trim(name));
  }
  t.columns.resize(t.header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(row, field, ',')) {
      if (col >= t.header.size()) break;
      field = trim(field);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size()) {
        throw ValidationError("CSV line " + std::to_string(line_no) + ": '" + field + "' is not a number");
      }
      t.columns[col++].push_back(v);
    }
    if (col != t.header.size()) {
      throw ValidationError("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
    }
  }
  return t;
}

}  // namespace wealthflow

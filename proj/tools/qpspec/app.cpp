#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qpspec/arithmetic.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/duality.hpp"
#include "qpspec/parallel.hpp"
#include "qpspec/potential.hpp"
#include "qpspec/rotation.hpp"
#include "qpspec/spectrum.hpp"
#include "qpspec/verify.hpp"
#include "svg.hpp"

namespace qpspec::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every flag of every subcommand.  Only the subset registered on the
// selected subcommand is meaningful for a run.
struct Params {
  std::string potential = "amo";
  std::string potential_file;
  double lambda = 0.5;
  std::string alpha = "golden";
  double alpha_beta = 0.0;
  int depth = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out, svg, config;

  int window = 5;
  double kappa = 0.1;
  double tau = 1.0;
  std::string dioph_K = "1000000";
  double theta = 0.0;
  double eps0 = 0.25;
  std::int64_t res_K = 300;

  double energy = 0.0;
  double emin = -3.0, emax = 3.0;
  int points = 200;
  std::int64_t steps = 100000;
  int phases = 8;
  std::int64_t smax = 100000;
  int checkpoints = 24;
  int L = 2000;
  double delta = 0.0;
  std::string method = "eigen-weights";
  double eta = 0.0;
  std::vector<double> eps = {0.1, 0.03, 0.01};
  double spacing = 0.2;
  int mask_phases = 8;
  int grid = 512;
  int candidates = 8;
  std::string target = "all";
  bool quick = false;
  std::vector<std::string> sweep;
  std::string quantity = "lyapunov";
  int alpha_points = 200;
};

struct Binding {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const json&)> load;
  std::function<json()> dump;
  bool echo = true;
};

// A subcommand plus the bookkeeping that lets a JSON config file supply any
// flag not given on the command line.
class Command {
 public:
  Command(CLI::App& root, const std::string& name, const std::string& help)
      : name_(name), app_(root.add_subcommand(name, help)) {}

  Params params;

  const std::string& name() const { return name_; }
  CLI::App* app() const { return app_; }

  template <class T>
  CLI::Option* option(const std::string& key, T& field, const std::string& help, bool echo = true) {
    CLI::Option* opt = app_->add_option("--" + key, field, help);
    if constexpr (!std::is_same_v<T, std::vector<double>> &&
                  !std::is_same_v<T, std::vector<std::string>>) {
      opt->capture_default_str();
    } else {
      opt->delimiter(',');
    }
    add_binding(key, opt, field, echo);
    return opt;
  }

  template <class T>
  CLI::Option* positional(const std::string& key, T& field, const std::string& help) {
    CLI::Option* opt = app_->add_option(key, field, help)->capture_default_str();
    add_binding(key, opt, field, true);
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& field, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + key, field, help);
    add_binding(key, opt, field, true);
    return opt;
  }

  bool given(const std::string& key) const {
    for (const auto& b : bindings_) {
      if (b.key == key) return b.option->count() > 0 || from_config_.count(key) > 0;
    }
    return false;
  }

  void apply_config(const json& config) {
    if (!config.is_object()) throw UsageError("config: top level must be a JSON object");
    for (const auto& [key, value] : config.items()) {
      if (key == "command") {
        if (value != name_) throw UsageError("config: command '" + value.dump() + "' does not match '" + name_ + "'");
        continue;
      }
      auto it = std::find_if(bindings_.begin(), bindings_.end(),
                             [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) throw UsageError("config: unknown key '" + key + "' for " + name_);
      if (it->option->count() > 0) continue;  // flags override the file
      try {
        it->load(value);
      } catch (const json::exception&) {
        throw UsageError("config: bad value for '" + key + "'");
      }
      from_config_.insert(key);
    }
  }

  json resolved() const {
    json j = json::object();
    j["command"] = name_;
    for (const auto& b : bindings_) {
      if (b.echo) j[b.key] = b.dump();
    }
    return j;
  }

 private:
  template <class T>
  void add_binding(const std::string& key, CLI::Option* opt, T& field, bool echo) {
    bindings_.push_back({key, opt, [&field](const json& j) { field = j.get<T>(); },
                         [&field] { return json(field); }, echo});
  }

  std::string name_;
  CLI::App* app_;
  std::vector<Binding> bindings_;
  std::set<std::string> from_config_;
};

// ---------------------------------------------------------------- inputs

void add_output_options(Command& cmd, Params& p, bool svg) {
  cmd.option("out", p.out, "Output file (stdout when omitted)", false);
  if (svg) cmd.option("svg", p.svg, "Also render an SVG plot to this path", false);
  cmd.option("config", p.config, "JSON file supplying defaults for any flag", false);
  cmd.option("threads", p.threads, "Worker threads (0 = all cores)", false);
}

void add_frequency_options(Command& cmd, Params& p) {
  cmd.option("alpha", p.alpha, "Frequency: golden, silver, e-2 or a decimal in (0,1)");
  cmd.option("alpha-beta", p.alpha_beta, "Build a Liouville-type frequency with this beta");
  cmd.option("depth", p.depth, "Continued-fraction depth (0 = preset default)");
}

void add_potential_options(Command& cmd, Params& p) {
  cmd.option("potential", p.potential, "Potential preset (amo)");
  cmd.option("potential-file", p.potential_file, "JSON potential {lambda, coeffs}");
  cmd.option("lambda", p.lambda, "Coupling constant");
}

void add_grid_options(Command& cmd, Params& p, double lo, double hi, int points) {
  p.emin = lo;
  p.emax = hi;
  p.points = points;
  cmd.option("emin", p.emin, "Lower end of the energy grid");
  cmd.option("emax", p.emax, "Upper end of the energy grid");
  cmd.option("points", p.points, "Number of grid points");
}

Frequency resolve_frequency(const Command& cmd, const Params& p) {
  if (cmd.given("alpha") && cmd.given("alpha-beta")) {
    throw UsageError("conflicting flags: --alpha and --alpha-beta");
  }
  if (p.depth < 0) throw UsageError("--depth must be non-negative");
  try {
    if (cmd.given("alpha-beta")) return build_frequency_with_beta(p.alpha_beta, p.depth > 0 ? p.depth : 7);
    if (p.alpha == "golden") return presets::golden(p.depth > 0 ? p.depth : 40);
    if (p.alpha == "silver") return presets::silver(p.depth > 0 ? p.depth : 40);
    if (p.alpha == "e-2") return presets::e_minus_two(p.depth > 0 ? p.depth : 30);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid frequency: ") + e.what());
  } catch (const std::length_error& e) {
    throw UsageError(std::string("invalid frequency: ") + e.what());
  }
  BigFloat x;
  try {
    x = parse_real(p.alpha);
  } catch (const std::exception&) {
    throw UsageError("invalid frequency: '" + p.alpha + "' is neither a preset nor a decimal");
  }
  if (!(x > 0 && x < 1)) throw UsageError("invalid frequency: alpha must lie in (0,1)");
  try {
    Frequency f = continued_fraction(x, p.depth > 0 ? p.depth : 40);
    if (f.depth() == 0) throw UsageError("invalid frequency: rational frequency");
    return f;
  } catch (const std::domain_error& e) {
    throw UsageError(std::string("invalid frequency: ") + e.what());
  }
}

PotentialSpec resolve_potential(const Command& cmd, const Params& p) {
  if (cmd.given("potential-file")) {
    if (cmd.given("potential")) throw UsageError("conflicting flags: --potential and --potential-file");
    std::ifstream in(p.potential_file);
    if (!in) throw UsageError("cannot read potential file '" + p.potential_file + "'");
    try {
      PotentialSpec v = potential_from_json(json::parse(in));
      return cmd.given("lambda") ? v.with_lambda(p.lambda) : v;
    } catch (const json::exception& e) {
      throw UsageError(std::string("potential file: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("potential file: ") + e.what());
    }
  }
  if (p.potential != "amo") throw UsageError("unknown potential '" + p.potential + "'");
  return make_amo(p.lambda);
}

// ---------------------------------------------------------------- outputs

std::string num(double x) { return fmt::format("{}", x); }

class Output {
 public:
  Output(const Command& cmd, const Params& p, std::ostream& out) : cmd_(cmd), p_(p), out_(out) {
    config_ = cmd.resolved();
  }

  json& config() { return config_; }

  void csv(const std::string& header, const std::vector<std::string>& rows,
           const std::vector<std::string>& trailer = {}) const {
    std::string text = "# config: " + config_.dump() + "\n" + header + "\n";
    for (const auto& r : rows) text += r + "\n";
    for (const auto& t : trailer) text += "# " + t + "\n";
    write(p_.out, text);
  }

  void json_result(const json& result) const {
    json doc = {{"config", config_}, {"result", result}};
    write(p_.out, doc.dump(2) + "\n");
  }

  bool wants_svg() const { return !p_.svg.empty(); }

  void svg(SvgPlot plot) const {
    if (p_.svg.empty()) return;
    plot.set_description(config_.dump());
    write_file(p_.svg, plot.render());
  }

  /// Config echo on stdout when the payload goes to a file.
  void echo() const {
    if (!p_.out.empty()) out_ << config_.dump() << "\n";
  }

 private:
  void write(const std::string& path, const std::string& text) const {
    if (path.empty()) {
      out_ << text;
    } else {
      write_file(path, text);
    }
  }

  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
  }

  const Command& cmd_;
  const Params& p_;
  std::ostream& out_;
  json config_;
};

json describe(const Frequency& f) {
  return {{"alpha", f.alpha()}, {"depth", f.depth()}, {"truncated", f.truncated()}};
}

std::vector<double> energy_list(const Command& cmd, const Params& p) {
  if (cmd.given("energy")) return {p.energy};
  if (p.points < 1) throw UsageError("--points must be positive");
  if (p.points > 1 && !(p.emin < p.emax)) throw UsageError("--emin must be below --emax");
  return p.points == 1 ? std::vector<double>{p.emin} : linear_grid(p.emin, p.emax, p.points);
}

// ---------------------------------------------------------------- sweep

struct SweepSpec {
  std::string name;
  std::vector<double> values;
};

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("malformed range: '" + s + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(x)) throw UsageError("malformed range: '" + s + "' is not a number");
  return x;
}

// name=start:stop:step (inclusive) or name=v1,v2,...
SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("malformed range: expected name=start:stop:step or name=v1,v2,...");
  SweepSpec spec{text.substr(0, eq), {}};
  const std::string body = text.substr(eq + 1);
  if (body.empty()) throw UsageError("malformed range: empty value list");
  if (body.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(body);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("malformed range: '" + body + "' needs start:stop:step");
    const double a = parse_number(parts[0]), b = parse_number(parts[1]), h = parse_number(parts[2]);
    if (!(h > 0) || b < a) throw UsageError("malformed range: need step > 0 and stop >= start");
    const auto n = static_cast<long long>(std::floor((b - a) / h + 1e-9)) + 1;
    if (n > 1000000) throw UsageError("malformed range: too many values");
    // Rounded to 12 significant digits so 0:1:0.1 yields 0.3, not 0.30000000000000004.
    for (long long i = 0; i < n; ++i) {
      spec.values.push_back(std::stod(fmt::format("{:.12g}", a + static_cast<double>(i) * h)));
    }
  } else {
    std::stringstream ss(body);
    for (std::string part; std::getline(ss, part, ',');) spec.values.push_back(parse_number(part));
  }
  return spec;
}

// Progress manifest next to the output: the config and the rows finished so
// far.  A rerun with the same config resumes after the last stored row.
class Manifest {
 public:
  Manifest(std::string path, json config) : path_(std::move(path)), config_(std::move(config)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;
    try {
      json j = json::parse(in);
      if (j.at("config") == config_) rows_ = j.at("rows").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      rows_.clear();
    }
  }

  const std::vector<std::string>& rows() const { return rows_; }

  void append(std::string row) {
    rows_.push_back(std::move(row));
    if (path_.empty()) return;
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary);
      f << json{{"config", config_}, {"rows", rows_}}.dump() << "\n";
    }
    std::filesystem::rename(tmp, path_);
  }

  void finish() {
    if (!path_.empty()) std::filesystem::remove(path_);
  }

 private:
  std::string path_;
  json config_;
  std::vector<std::string> rows_;
};

// ---------------------------------------------------------------- commands

using Runner = std::function<int(Command&, Params&, std::ostream&)>;

int cmd_beta(Command& cmd, Params& p, std::ostream& os) {
  const Frequency f = resolve_frequency(cmd, p);
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  BetaEstimate b;
  try {
    b = beta_estimate(f, p.window);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out.json_result({{"beta", to_json(b)}, {"frequency", to_json(f)}});
  out.echo();
  return kExitOk;
}

int cmd_dioph(Command& cmd, Params& p, std::ostream& os) {
  const Frequency f = resolve_frequency(cmd, p);
  BigInt K;
  try {
    K = BigInt(p.dioph_K);
  } catch (const std::exception&) {
    throw UsageError("--K must be an integer");
  }
  if (K < 1) throw UsageError("--K must be >= 1");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  const auto r = diophantine_check(f, p.kappa, p.tau, K);
  out.json_result({{"holds", r.holds},
                   {"worst_k", r.worst_k.str()},
                   {"log_margin", r.log_margin},
                   {"checked_up_to", r.checked_up_to.str()}});
  out.echo();
  return kExitOk;
}

int cmd_resonances(Command& cmd, Params& p, std::ostream& os) {
  const Frequency f = resolve_frequency(cmd, p);
  if (!(p.eps0 > 0) || p.res_K < 0) throw UsageError("need --eps0 > 0 and --K >= 0");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  out.json_result(to_json(find_resonances(p.theta, f, p.eps0, p.res_K)));
  out.echo();
  return kExitOk;
}

void line_plot(const Output& out, const std::string& title, const std::string& xl, const std::string& yl,
               std::vector<double> x, std::vector<double> y) {
  if (!out.wants_svg()) return;
  SvgPlot plot(title, xl, yl);
  plot.add({std::move(x), std::move(y), "", false});
  out.svg(std::move(plot));
}

int cmd_lyapunov(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  const auto energies = energy_list(cmd, p);
  if (p.steps < 1 || p.phases < 1) throw UsageError("need --steps >= 1 and --phases >= 1");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  std::vector<std::string> rows;
  std::vector<double> ys;
  for (double E : energies) {
    const auto est = lyapunov_exponent(v, f, E, p.steps, p.phases);
    rows.push_back(num(E) + "," + num(est.value) + "," + num(est.stderr_value));
    ys.push_back(est.value);
  }
  out.csv("E,lyapunov,stderr", rows);
  line_plot(out, "Lyapunov exponent", "E", "L(E)", energies, ys);
  out.echo();
  return kExitOk;
}

int cmd_growth(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.smax < 1 || p.phases < 1 || p.checkpoints < 1) throw UsageError("need positive --smax, --phases, --checkpoints");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  const auto profile = growth_profile(Cocycle::schrodinger(v, f.alpha(), p.energy), p.smax, p.phases, p.checkpoints);
  std::vector<std::string> rows;
  std::vector<double> xs, ys;
  for (const auto& c : profile.checkpoints) {
    rows.push_back(std::to_string(c.s) + "," + num(c.sup_log_norm) + "," + num(c.running_sup));
    xs.push_back(std::log(static_cast<double>(c.s)));
    ys.push_back(c.sup_log_norm);
  }
  out.csv("s,sup_log_norm,running_sup", rows);
  line_plot(out, "Transfer-matrix growth", "ln s", "sup ln ||A_s||", xs, ys);
  out.echo();
  return kExitOk;
}

int cmd_rotation(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  const auto energies = energy_list(cmd, p);
  if (p.steps < 1000) throw UsageError("--steps must be at least 1000");
  if (p.phases < 1) throw UsageError("--phases must be positive");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  std::vector<std::string> rows;
  std::vector<double> ys;
  for (double E : energies) {
    const auto r = rotation_number(v, f, E, p.steps, p.phases);
    rows.push_back(num(E) + "," + num(r.rho) + "," + num(ids_from_rotation(r)) + "," + num(r.spread));
    ys.push_back(r.rho);
  }
  out.csv("E,rho,ids,spread", rows);
  line_plot(out, "Rotation number", "E", "rho(E)", energies, ys);
  out.echo();
  return kExitOk;
}

int cmd_ids(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  const auto energies = energy_list(cmd, p);
  if (p.L < 2 || p.phases < 1) throw UsageError("need --L >= 2 and --phases >= 1");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  const auto curve = ids(v, f, energies, p.L, p.phases);
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) rows.push_back(num(curve.grid[i]) + "," + num(curve.values[i]));
  out.csv("E,N", rows);
  if (out.wants_svg()) {
    // Staircase: hold each value until the next grid point.
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      if (i > 0) {
        xs.push_back(curve.grid[i]);
        ys.push_back(curve.values[i - 1]);
      }
      xs.push_back(curve.grid[i]);
      ys.push_back(curve.values[i]);
    }
    SvgPlot plot("Integrated density of states", "E", "N(E)");
    plot.set_y_range(0.0, 1.0);
    plot.add({xs, ys, "", false});
    out.svg(std::move(plot));
  }
  out.echo();
  return kExitOk;
}

int cmd_spectrum(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.L < 2 || p.phases < 1) throw UsageError("need --L >= 2 and --phases >= 1");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  std::vector<TruncatedOperator> ops;
  for (double x : phase_grid(p.phases)) ops.push_back(truncate(v, f, x, p.L));
  const auto levels = robust_spectrum(ops, p.delta > 0 ? p.delta : 10.0 / p.L);
  std::vector<std::string> rows;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rows.push_back(std::to_string(i) + "," + num(levels[i]));
    xs.push_back(levels[i]);
    ys.push_back(static_cast<double>(i + 1) / p.L);
  }
  out.csv("index,E", rows);
  if (out.wants_svg()) {
    SvgPlot plot("Spectrum levels", "E", "level / L");
    plot.add({xs, ys, "", true});
    out.svg(std::move(plot));
  }
  out.echo();
  return kExitOk;
}

int cmd_measure(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.points < 2 || !(p.emin < p.emax)) throw UsageError("need --points >= 2 and --emin < --emax");
  MeasureMethod method;
  try {
    method = measure_method_from_string(p.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  SpectralMeasureApprox m;
  try {
    m = spectral_measure(v, f, p.theta, linear_grid(p.emin, p.emax, p.points), p.L, method, p.eta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> rows;
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < m.masses.size(); ++i) {
    rows.push_back(num(m.partition[i]) + "," + num(m.partition[i + 1]) + "," + num(m.masses[i]));
    cells.push_back({m.partition[i], m.partition[i + 1], 0.0, m.masses[i]});
  }
  out.csv("a,b,mass", rows, {"total: " + num(m.total)});
  if (out.wants_svg()) {
    SvgPlot plot("Spectral measure (" + to_string(method) + ")", "E", "mass per cell");
    plot.add_cells(std::move(cells));
    out.svg(std::move(plot));
  }
  out.echo();
  return kExitOk;
}

int cmd_holder(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.eps.empty() || std::any_of(p.eps.begin(), p.eps.end(), [](double e) { return !(e > 0); })) {
    throw UsageError("--eps needs positive values");
  }
  if (!(p.spacing > 0 && p.spacing <= 0.25)) throw UsageError("--spacing must lie in (0, 0.25]");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  auto eps = p.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const double radius = 2.0 + std::abs(v.lambda()) * strip_norm(v, 0.0) + eps.front() + 0.05;
  const int points = static_cast<int>(std::ceil(2.0 * radius / (p.spacing * eps.back()))) + 1;
  const auto grid = linear_grid(-radius, radius, points);
  const auto mask = spectrum_mask(v, f, grid, p.L, p.mask_phases, 10.0 / p.L);
  const auto rows = holder_scan(ids(v, f, grid, p.L, p.phases), eps, mask);
  std::vector<std::string> lines;
  std::vector<double> xs, up, lo;
  for (const auto& r : rows) {
    lines.push_back(num(r.eps) + "," + num(r.upper) + "," + num(r.upper_at) + "," + num(r.lower) + "," +
                    num(r.lower_at) + "," + std::to_string(r.lower_samples));
    xs.push_back(std::log10(r.eps));
    up.push_back(r.upper);
    lo.push_back(r.lower);
  }
  out.csv("eps,upper,upper_at,lower,lower_at,lower_samples", lines);
  if (out.wants_svg()) {
    SvgPlot plot("Hoelder ratios", "log10 eps", "ratio");
    plot.add({xs, up, "upper dN/sqrt(eps)", false});
    plot.add({xs, lo, "lower dN/eps^2", false});
    out.svg(std::move(plot));
  }
  out.echo();
  return kExitOk;
}

int cmd_dual(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.L < 3 || p.grid < 8 || p.candidates < 1) throw UsageError("need --L >= 3, --grid >= 8, --candidates >= 1");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  const double E = cmd.given("energy") ? p.energy : spectral_samples(v, f, 2000, 1, p.seed).front();
  out.config()["resolved_energy"] = E;
  DualSearchOptions options;
  options.theta_grid_size = p.grid;
  options.refine_candidates = p.candidates;
  out.json_result(to_json(dual_bounded_solution(v, f, E, p.L, options)));
  out.echo();
  return kExitOk;
}

int cmd_verify(Command& cmd, Params& p, std::ostream& os) {
  const PotentialSpec v = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  static const std::set<std::string> targets = {"all", "lyapunov", "holder", "resonance", "duality",
                                                "measure", "ac"};
  if (!targets.count(p.target)) throw UsageError("unknown verify target '" + p.target + "'");
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);
  std::vector<ExperimentReport> reports;
  if (p.target == "all") {
    reports = run_all(v, f, {p.seed, p.quick});
  } else if (p.target == "lyapunov") {
    LyapunovCheckOptions o;
    o.seed = p.seed;
    o.lambda_max = std::max(o.lambda_max, std::abs(v.lambda()));
    if (p.quick) o.samples = 5, o.n_steps = 50000;
    reports.push_back(verify_zero_lyapunov(v, f, o));
  } else if (p.target == "holder") {
    HolderCheckOptions o;
    if (p.quick) o.L = 1000, o.phase_count = 8, o.eps_list = {0.1, 0.05};
    reports.push_back(verify_holder(v, f, o));
  } else if (p.target == "resonance") {
    const auto energies = spectral_samples(v, f, 2000, p.quick ? 4 : 30, p.seed);
    reports.push_back(verify_rotation_resonance(v, f, energies).report);
  } else if (p.target == "duality") {
    DualityCheckOptions o;
    o.seed = p.seed;
    if (p.quick) o.samples = 3, o.dual_L = 201;
    reports.push_back(verify_duality(v, f, o));
  } else if (p.target == "measure") {
    MeasureCheckOptions o;
    o.seed = p.seed;
    if (p.quick) o.samples = 4, o.phase_count = 16;
    reports.push_back(verify_measure_bound(v, f, o));
  } else {
    AcProxyOptions o;
    o.seed = p.seed;
    if (p.quick) o.samples = 5, o.horizon = 10000;
    reports.push_back(ac_spectrum_proxy(v, f, o));
  }
  bool failed = false;
  json list = json::array();
  for (const auto& r : reports) {
    failed = failed || r.verdict == Verdict::Fail;
    list.push_back(to_json(r));
  }
  out.json_result({{"reports", list}, {"verdict", failed ? "fail" : "pass"}});
  out.echo();
  return failed ? kExitFailure : kExitOk;
}

int cmd_sweep(Command& cmd, Params& p, std::ostream& os) {
  if (p.sweep.size() != 1) {
    throw UsageError("sweep: exactly one swept parameter required, got " + std::to_string(p.sweep.size()));
  }
  const SweepSpec spec = parse_sweep(p.sweep.front());
  static const std::set<std::string> names = {"lambda", "E", "theta"};
  if (!names.count(spec.name)) throw UsageError("sweep: cannot sweep '" + spec.name + "' (lambda, E or theta)");
  static const std::set<std::string> quantities = {"lyapunov", "rotation", "ids", "raster"};
  if (!quantities.count(p.quantity)) throw UsageError("sweep: unknown quantity '" + p.quantity + "'");
  if (p.quantity == "raster" && spec.name != "E") throw UsageError("sweep: the raster sweeps E");
  if (p.quantity != "raster" && spec.name == "theta") throw UsageError("sweep: theta only matters for the raster");
  const PotentialSpec base = resolve_potential(cmd, p);
  const Frequency f = resolve_frequency(cmd, p);
  if (p.steps < 1000 || p.phases < 1 || p.L < 2 || p.alpha_points < 1) {
    throw UsageError("sweep: need --steps >= 1000, --phases >= 1, --L >= 2, --alpha-points >= 1");
  }
  Output out(cmd, p, os);
  out.config()["frequency"] = describe(f);

  auto setting = [&](double value) {
    return std::make_pair(spec.name == "lambda" ? base.with_lambda(value) : base,
                          spec.name == "E" ? value : p.energy);
  };
  std::string header;
  std::function<std::string(double)> row;
  std::vector<double> alphas;
  std::vector<std::vector<double>> raster_levels;
  if (p.quantity == "raster") {
    // Hofstadter-style picture: for each alpha column, the levels of one
    // truncation; a cell is lit when a level lies within delta of E.
    header = "E";
    alphas.resize(p.alpha_points);
    raster_levels.resize(p.alpha_points);
    for (int j = 0; j < p.alpha_points; ++j) {
      alphas[j] = (j + 0.5) / p.alpha_points;
      header += ",a" + num(alphas[j]);
    }
    parallel_for(alphas.size(), [&](std::size_t j) {
      raster_levels[j] = eigenvalues(truncate(base, alphas[j], p.theta, p.L));
    });
    const double delta = p.delta > 0 ? p.delta : 10.0 / p.L;
    row = [&, delta](double E) {
      std::string r = num(E);
      for (const auto& s : raster_levels) {
        const auto it = std::lower_bound(s.begin(), s.end(), E);
        double d = std::numeric_limits<double>::infinity();
        if (it != s.end()) d = std::min(d, *it - E);
        if (it != s.begin()) d = std::min(d, E - *(it - 1));
        r += d <= delta ? ",1" : ",0";
      }
      return r;
    };
  } else {
    if (p.quantity == "lyapunov") {
      header = spec.name + ",lyapunov,stderr";
      row = [&](double value) {
        const auto [v, E] = setting(value);
        const auto est = lyapunov_exponent(v, f, E, p.steps, p.phases);
        return num(value) + "," + num(est.value) + "," + num(est.stderr_value);
      };
    } else if (p.quantity == "rotation") {
      header = spec.name + ",rho,ids";
      row = [&](double value) {
        const auto [v, E] = setting(value);
        const auto r = rotation_number(v, f, E, p.steps, p.phases);
        return num(value) + "," + num(r.rho) + "," + num(ids_from_rotation(r));
      };
    } else {
      header = spec.name + ",N";
      row = [&](double value) {
        const auto [v, E] = setting(value);
        return num(value) + "," + num(ids(v, f, {E}, p.L, p.phases).values.front());
      };
    }
  }

  json manifest_config = out.config();
  manifest_config["sweep_values"] = spec.values;
  Manifest manifest(p.out.empty() ? "" : p.out + ".progress.json", manifest_config);
  for (std::size_t i = manifest.rows().size(); i < spec.values.size(); ++i) {
    manifest.append(row(spec.values[i]));
  }
  const std::vector<std::string> rows = manifest.rows();
  out.csv(header, rows);

  if (out.wants_svg()) {
    if (p.quantity == "raster") {
      SvgPlot plot("Spectrum raster", "alpha", "E");
      std::vector<Cell> cells;
      const double da = 1.0 / p.alpha_points;
      for (std::size_t i = 0; i < spec.values.size(); ++i) {
        const double dE = spec.values.size() > 1
                              ? std::abs(spec.values[std::min(i + 1, spec.values.size() - 1)] -
                                         spec.values[i == spec.values.size() - 1 ? i - 1 : i])
                              : 0.01;
        std::stringstream ss(rows[i]);
        std::string cell;
        std::getline(ss, cell, ',');
        for (std::size_t j = 0; std::getline(ss, cell, ','); ++j) {
          if (cell == "1") cells.push_back({alphas[j] - da / 2, alphas[j] + da / 2, spec.values[i] - dE / 2, spec.values[i] + dE / 2});
        }
      }
      plot.set_x_range(0.0, 1.0);
      plot.add_cells(std::move(cells));
      out.svg(std::move(plot));
    } else {
      std::vector<double> ys;
      for (const auto& r : rows) {
        const auto a = r.find(','), b = r.find(',', a + 1);
        ys.push_back(std::stod(r.substr(a + 1, b - a - 1)));
      }
      line_plot(out, "Sweep of " + p.quantity, spec.name, p.quantity, spec.values, ys);
    }
  }
  manifest.finish();
  out.echo();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& os, std::ostream& es) {
  CLI::App app{"Numerical experiments for quasi-periodic Schroedinger operators", "qpspec"};
  app.require_subcommand(1);
  std::vector<std::pair<std::unique_ptr<Command>, Runner>> commands;
  auto add = [&](const std::string& name, const std::string& help, Runner runner) -> Command& {
    commands.emplace_back(std::make_unique<Command>(app, name, help), std::move(runner));
    return *commands.back().first;
  };

  {
    auto& c = add("beta", "Exponential approximation rate beta(alpha)", cmd_beta);
    auto& p = c.params;
    add_frequency_options(c, p);
    c.option("window", p.window, "Trailing levels in the limsup proxy");
    add_output_options(c, p, false);
  }
  {
    auto& c = add("dioph", "Diophantine condition ||k alpha|| > kappa |k|^-tau", cmd_dioph);
    auto& p = c.params;
    add_frequency_options(c, p);
    c.option("kappa", p.kappa, "kappa");
    c.option("tau", p.tau, "tau");
    c.option("K", p.dioph_K, "Largest |k| to check");
    add_output_options(c, p, false);
  }
  {
    auto& c = add("resonances", "eps0-resonances of a phase", cmd_resonances);
    auto& p = c.params;
    add_frequency_options(c, p);
    c.option("theta", p.theta, "Phase");
    c.option("eps0", p.eps0, "Resonance strength");
    c.option("K", p.res_K, "Search bound on |k|");
    add_output_options(c, p, false);
  }
  {
    auto& c = add("lyapunov", "Lyapunov exponent on an energy grid", cmd_lyapunov);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("energy", p.energy, "Single energy (overrides the grid)");
    add_grid_options(c, p, -3.0, 3.0, 61);
    c.option("steps", p.steps, "Cocycle steps");
    c.option("phases", p.phases, "Phases averaged");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("growth", "Sup of ln ||A_s|| over phases at checkpoints", cmd_growth);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("energy", p.energy, "Energy");
    c.option("smax", p.smax, "Largest s");
    c.option("phases", p.phases, "Phases");
    c.option("checkpoints", p.checkpoints, "Geometric checkpoints");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("rotation", "Fibered rotation number and N = 1 - 2 rho", cmd_rotation);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("energy", p.energy, "Single energy (overrides the grid)");
    add_grid_options(c, p, -3.0, 3.0, 61);
    c.option("steps", p.steps, "Cocycle steps");
    c.option("phases", p.phases, "Phases averaged");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("ids", "Integrated density of states by eigenvalue counting", cmd_ids);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("energy", p.energy, "Single energy (overrides the grid)");
    add_grid_options(c, p, -3.0, 3.0, 200);
    c.option("L", p.L, "Truncation size");
    c.option("phases", p.phases, "Phases averaged");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("spectrum", "Phase-robust levels of the truncated operator", cmd_spectrum);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("L", p.L, "Truncation size");
    c.option("phases", p.phases, "Phases that must all see a level");
    c.option("delta", p.delta, "Matching tolerance (0 = 10 / L)");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("measure", "Spectral measure masses of e_{-1} + e_0", cmd_measure);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("theta", p.theta, "Phase");
    add_grid_options(c, p, -5.0, 5.0, 101);
    c.option("L", p.L, "Truncation size");
    c.option("method", p.method, "eigen-weights or herglotz");
    c.option("eta", p.eta, "Herglotz smoothing (0 = 20 / L)");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("holder", "Hoelder ratios of the IDS", cmd_holder);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("L", p.L, "Truncation size");
    c.option("phases", p.phases, "Phases averaged in the IDS");
    c.option("eps", p.eps, "Comma-separated eps values");
    c.option("spacing", p.spacing, "Grid spacing as a fraction of the smallest eps");
    c.option("mask-phases", p.mask_phases, "Phases for the spectral mask");
    add_output_options(c, p, true);
  }
  {
    auto& c = add("dual", "Bounded solution of the dual eigenvalue equation", cmd_dual);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("energy", p.energy, "Energy (default: a seeded spectral sample)");
    c.option("L", p.L, "Dual truncation size");
    c.option("grid", p.grid, "Coarse theta grid");
    c.option("candidates", p.candidates, "Candidates refined");
    c.option("seed", p.seed, "Seed for the energy sample");
    add_output_options(c, p, false);
  }
  {
    auto& c = add("verify", "Run experiment checks and aggregate the reports", cmd_verify);
    auto& p = c.params;
    c.positional("target", p.target, "all, lyapunov, holder, resonance, duality, measure or ac");
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("seed", p.seed, "Seed for spectral sampling");
    c.flag("quick", p.quick, "Reduced sizes for smoke runs");
    add_output_options(c, p, false);
  }
  {
    auto& c = add("sweep", "One-parameter sweep with a resumable manifest", cmd_sweep);
    auto& p = c.params;
    add_potential_options(c, p);
    add_frequency_options(c, p);
    c.option("sweep", p.sweep, "name=start:stop:step or name=v1,...; exactly one")->delimiter('\0');
    c.option("quantity", p.quantity, "lyapunov, rotation, ids or raster");
    c.option("energy", p.energy, "Energy when E is not swept");
    c.option("steps", p.steps, "Cocycle steps");
    c.option("phases", p.phases, "Phases averaged");
    c.option("L", p.L, "Truncation size (ids, raster)");
    c.option("theta", p.theta, "Phase of the raster truncations");
    c.option("alpha-points", p.alpha_points, "Raster columns");
    c.option("delta", p.delta, "Raster tolerance (0 = 10 / L)");
    add_output_options(c, p, true);
  }
  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      std::none_of(commands.begin(), commands.end(),
                   [&](const auto& c) { return c.first->name() == args.front(); })) {
    es << "error: unknown subcommand '" << args.front() << "'\n";
    return kExitUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, os, es);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& [cmd, runner] : commands) {
    if (!cmd->app()->parsed()) continue;
    Params& p = cmd->params;
    try {
      if (!p.config.empty()) {
        std::ifstream in(p.config);
        if (!in) throw UsageError("cannot read config '" + p.config + "'");
        json config;
        try {
          config = json::parse(in);
        } catch (const json::exception& e) {
          throw UsageError(std::string("config: ") + e.what());
        }
        cmd->apply_config(config);
      }
      set_thread_count(p.threads);
      return runner(*cmd, p, os);
    } catch (const UsageError& e) {
      es << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      es << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace qpspec::cli

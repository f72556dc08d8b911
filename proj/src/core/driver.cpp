#include "driver.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "homogenize.hpp"
#include "json.hpp"
#include "spectral.hpp"
#include "stability.hpp"

namespace pfront {

// ---------------------------------------------------------------------------
// Schema

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"run", "scenario", "", "front|homogenize|eigen|steady|scan-e|stability|decay|quench-scan (subcommand wins)"},
      {"run", "workers", "1", "worker threads for sweeps and the linearised map"},

      {"profile", "family", "", "cubic|xin|tabulated (required)"},
      {"profile", "period", "1", "period L of the medium"},
      {"profile", "coefficient", "constant", "constant|cosine|sine|reciprocal-cosine|tabulated"},
      {"profile", "a0", "1", "constant part of a(y) (b0 for reciprocal-cosine)"},
      {"profile", "a1", "0", "amplitude of a(y) (b1 for reciprocal-cosine)"},
      {"profile", "coefficient_file", "", "two-column `y a` table for coefficient=tabulated"},
      {"profile", "theta", "0.3", "cubic: mean intermediate zero"},
      {"profile", "theta_amp", "0", "cubic: theta(y) = theta + theta_amp cos(2 pi y)"},
      {"profile", "theta_file", "", "tabulated: two-column `y theta` table"},
      {"profile", "scale", "1", "cubic: f = scale u(1-u)(u-theta(y))"},
      {"profile", "gamma", "0", "stability margin gamma (0: from the cubic family)"},
      {"profile", "delta", "0", "margin delta (0: from the cubic family)"},
      {"profile", "K", "0", "Lipschitz bound of f and d_u f (0: closed form)"},
      {"profile", "xin_delta", "0.2", "xin: delta"},
      {"profile", "xin_lambda", "0", "xin: lambda"},
      {"profile", "xin_mu", "0.3", "xin: mu"},

      {"numerics", "nodes_per_period", "64", "lower bound on nodes per period"},
      {"numerics", "h_max", "0.05", "largest mesh width"},
      {"numerics", "dt", "0", "time step (0: min(0.02, 0.4/K))"},
      {"numerics", "scheme", "imex", "imex|cn"},
      {"numerics", "datum", "tanh", "initial front datum: step|ramp|tanh"},
      {"numerics", "datum_width", "1", "width of the initial interface"},
      {"numerics", "half_width", "0", "half-width of the window (0: from decay estimate)"},
      {"numerics", "tol_puls", "1e-3", "pulsating defect tolerance"},
      {"numerics", "tol_stat", "1e-6", "stationary residual tolerance"},
      {"numerics", "t_max", "1000", "simulated time budget per front run"},
      {"numerics", "max_steps", "0", "step budget (0: unlimited)"},
      {"numerics", "moving_window", "true", "re-centre the window by whole periods"},
      {"numerics", "extract_periods", "2", "periods averaged in the profile lattice"},
      {"numerics", "mirror", "false", "front: also run the mirrored instance (leftward front)"},

      {"homogenize", "periods", "0.8,0.4,0.2,0.1", "decreasing periods of the sweep"},
      {"homogenize", "tol_c", "1e-10", "bisection tolerance on c0"},
      {"homogenize", "eps", "1e-6", "shooting offset from the state 1"},

      {"eigen", "mode", "dirichlet", "dirichlet|periodic|trace"},
      {"eigen", "state", "constant", "constant|theta: linearisation state u_bar"},
      {"eigen", "state_value", "0", "value of the constant state"},
      {"eigen", "R", "5", "dirichlet half-length"},
      {"eigen", "nodes", "2048", "dirichlet nodes"},
      {"eigen", "R_list", "1,2,4,8,16", "trace: increasing half-lengths"},
      {"eigen", "h", "0.01", "trace: mesh width"},
      {"eigen", "periodic_nodes", "256", "periodic nodes per period"},

      {"steady", "nodes_per_period", "256", "nodes per period"},
      {"steady", "h_max", "0.02", "largest mesh width"},
      {"steady", "tol", "1e-10", "Newton residual tolerance"},
      {"steady", "max_iter", "100", "Newton iterations per seed"},

      {"scan", "periods", "0.25,0.5,1,2,4", "periods L of the scan"},

      {"stability", "datum", "perturbed", "perturbed|shifted|step|exact|initialv2"},
      {"stability", "t_max", "150", "experiment budget"},
      {"stability", "probe_dt", "1", "probe interval"},
      {"stability", "shift_periods", "3", "shift of the shifted/exact datum in periods"},
      {"stability", "bump_amplitude", "0.05", "perturbed: bump height"},
      {"stability", "v2_margin", "0.05", "initialv2: offset from the steady states"},
      {"stability", "final_tol", "1e-4", "acceptance bound on the final sup error"},
      {"stability", "spectrum", "true", "also compute the linearised period-map spectrum"},
      {"stability", "spectrum_nodes", "400", "coarse frame nodes (<= 402)"},
      {"stability", "spectrum_half_width", "20", "coarse frame half-width"},
      {"stability", "spectrum_modes", "20", "eigenvalues reported"},

      {"decay", "potential", "linearized", "linearized|margin"},
      {"decay", "speed", "", "speed used in T_mu (empty: computed front)"},
      {"decay", "mu_max", "50", "root bracket upper end"},
      {"decay", "nodes", "256", "minimum nodes of the cell discretisation"},

      {"quench", "lambdas", "0,1,2,3,4", "lambda grid of the Xin family"},

      {"output", "profile_stride", "1", "xi stride of profile dumps"},
  };
  return schema;
}

std::string config_help() {
  std::ostringstream out;
  out << "Config keys (INI sections, defaults in brackets):\n";
  std::string section;
  for (const ConfigKey& k : config_schema()) {
    if (k.section != section) {
      section = k.section;
      out << "  [" << section << "]\n";
    }
    out << "    " << std::left << std::setw(22) << k.key << "[" << k.default_value << "]  " << k.doc
        << "\n";
  }
  return out.str();
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"front",  "homogenize", "eigen",
                                                 "steady", "scan-e",     "stability",
                                                 "decay",  "quench-scan"};
  return names;
}

// ---------------------------------------------------------------------------
// Config access

namespace {

std::string qualified(const std::string& s, const std::string& k) { return s + "." + k; }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalise_scenario(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "'" + v + "' is not a number");
  }
  if (trim(v.substr(used)) != "") throw ConfigError(key, "'" + v + "' is not a number");
  return x;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

const std::string& ExperimentConfig::get(const std::string& s, const std::string& k) const {
  auto it = values_.find(qualified(s, k));
  if (it == values_.end()) throw ConfigError(qualified(s, k), "not a known key");
  return it->second;
}

double ExperimentConfig::number(const std::string& s, const std::string& k) const {
  return parse_number(qualified(s, k), get(s, k));
}

int ExperimentConfig::integer(const std::string& s, const std::string& k) const {
  const double v = number(s, k);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(qualified(s, k), "expected an integer");
  return int(v);
}

bool ExperimentConfig::flag(const std::string& s, const std::string& k) const {
  std::string v = normalise_scenario(get(s, k));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(qualified(s, k), "expected true or false, got '" + v + "'");
}

std::vector<double> ExperimentConfig::list(const std::string& s, const std::string& k) const {
  std::vector<double> out;
  std::stringstream ss(get(s, k));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(qualified(s, k), item));
  }
  return out;
}

bool ExperimentConfig::given(const std::string& s, const std::string& k) const {
  auto it = given_.find(qualified(s, k));
  return it != given_.end() && it->second;
}

void ExperimentConfig::set(const std::string& s, const std::string& k, const std::string& v) {
  get(s, k);  // validates the key
  values_[qualified(s, k)] = v;
  given_[qualified(s, k)] = true;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "scenario=" << scenario << "\n";
  for (const auto& [k, v] : values_) {
    if (k == "run.scenario" || k == "run.workers") continue;  // workers never change results
    out << k << "=" << v << "\n";
  }
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& scenario) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  // Inline comments: whitespace followed by ';' or '#'.
  std::string cleaned, line;
  std::istringstream raw(text);
  while (std::getline(raw, line)) {
    for (std::size_t i = 1; i < line.size(); ++i)
      if ((line[i] == ';' || line[i] == '#') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    cleaned += line + '\n';
  }
  std::istringstream in(cleaned);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const ConfigKey& k : config_schema()) cfg.values_[qualified(k.section, k.key)] = k.default_value;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside any section");
    bool known_section = false;
    for (const ConfigKey& k : config_schema()) known_section |= k.section == section;
    if (!known_section) throw ConfigError(section, "unknown section");
    for (const auto& [key, node] : body) {
      const std::string q = qualified(section, key);
      if (!cfg.values_.count(q)) throw ConfigError(q, "unknown key");
      cfg.values_[q] = trim(node.get_value<std::string>());
      cfg.given_[q] = true;
    }
  }
  std::string file_scenario = normalise_scenario(cfg.values_["run.scenario"]);
  std::string sub = normalise_scenario(scenario);
  if (!sub.empty() && !file_scenario.empty() && sub != file_scenario)
    throw ConfigError("run.scenario", "'" + file_scenario + "' conflicts with subcommand '" + sub + "'");
  cfg.scenario = sub.empty() ? file_scenario : sub;
  if (cfg.scenario.empty()) throw ConfigError("run.scenario", "no scenario given");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), cfg.scenario) == names.end())
    throw ConfigError("run.scenario", "unknown scenario '" + cfg.scenario + "'");
  if (cfg.values_["profile.family"].empty())
    throw ConfigError("profile.family", "missing profile definition");
  if (cfg.integer("run", "workers") < 1) throw ConfigError("run.workers", "must be at least 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), scenario);
}

// ---------------------------------------------------------------------------
// Instances

namespace {

CoefficientProfile build_coefficient(const ExperimentConfig& cfg) {
  const std::string kind = cfg.get("profile", "coefficient");
  const double a0 = cfg.number("profile", "a0"), a1 = cfg.number("profile", "a1");
  if (kind == "constant") return constant_coefficient(a0);
  if (kind == "cosine") return cosine_coefficient(a0, a1);
  if (kind == "sine") return sine_coefficient(a0, a1);
  if (kind == "reciprocal-cosine") return reciprocal_cosine_coefficient(a0, a1);
  if (kind == "tabulated") {
    const std::string path = cfg.get("profile", "coefficient_file");
    if (path.empty()) throw ConfigError("profile.coefficient_file", "required for coefficient=tabulated");
    return tabulated_coefficient(read_tabulated(path));
  }
  throw ConfigError("profile.coefficient", "unknown coefficient '" + kind + "'");
}

}  // namespace

ProblemInstance build_instance(const ExperimentConfig& cfg) {
  const std::string family = cfg.get("profile", "family");
  const double L = cfg.number("profile", "period");
  if (!(L > 0.0)) throw ConfigError("profile.period", "must be positive");
  if (family == "xin") {
    ProblemInstance inst = make_xin_example(cfg.number("profile", "xin_delta"),
                                            cfg.number("profile", "xin_lambda"),
                                            cfg.number("profile", "xin_mu"));
    return L == 1.0 ? inst : with_period(inst, L);
  }
  std::function<double(double)> theta;
  double th_min = 0.0, th_max = 0.0;
  bool x_independent = false;
  if (family == "cubic") {
    const double th = cfg.number("profile", "theta"), amp = cfg.number("profile", "theta_amp");
    theta = [th, amp](double y) { return th + amp * std::cos(kTwoPi * y); };
    th_min = th - std::abs(amp);
    th_max = th + std::abs(amp);
    x_independent = amp == 0.0;
  } else if (family == "tabulated") {
    const std::string path = cfg.get("profile", "theta_file");
    if (path.empty()) throw ConfigError("profile.theta_file", "required for family=tabulated");
    const std::vector<double> samples = read_tabulated(path);
    th_min = *std::min_element(samples.begin(), samples.end());
    th_max = *std::max_element(samples.begin(), samples.end());
    const CoefficientProfile spline = tabulated_coefficient(samples);
    theta = spline.a;
    x_independent = th_min == th_max;
  } else {
    throw ConfigError("profile.family", "unknown family '" + family + "'");
  }
  if (!(th_min > 0.0 && th_max < 1.0)) throw ConfigError("profile.theta", "theta must stay inside (0,1)");
  const double scale = cfg.number("profile", "scale");
  if (!(scale > 0.0)) throw ConfigError("profile.scale", "must be positive");
  const CubicMargins auto_m = cubic_margins(th_min, th_max, scale);
  const double gamma = cfg.number("profile", "gamma") > 0 ? cfg.number("profile", "gamma") : auto_m.gamma;
  const double delta = cfg.number("profile", "delta") > 0 ? cfg.number("profile", "delta") : auto_m.delta;
  ReactionProfile r = make_cubic(theta, gamma, delta, cfg.number("profile", "K"), scale, x_independent);
  return make_instance(build_coefficient(cfg), r, L);
}

FrontConfig build_front_config(const ExperimentConfig& cfg) {
  FrontConfig fc;
  fc.nodes_per_period = cfg.integer("numerics", "nodes_per_period");
  fc.h_max = cfg.number("numerics", "h_max");
  fc.dt = cfg.number("numerics", "dt");
  const std::string scheme = cfg.get("numerics", "scheme");
  if (scheme == "imex") fc.scheme = Scheme::Imex;
  else if (scheme == "cn") fc.scheme = Scheme::CrankNicolson;
  else throw ConfigError("numerics.scheme", "unknown scheme '" + scheme + "'");
  try {
    fc.datum = parse_datum_style(cfg.get("numerics", "datum"));
  } catch (const ConfigError&) {
    throw ConfigError("numerics.datum", "unknown datum '" + cfg.get("numerics", "datum") + "'");
  }
  fc.datum_width = cfg.number("numerics", "datum_width");
  fc.half_width = cfg.number("numerics", "half_width");
  fc.tol_puls = cfg.number("numerics", "tol_puls");
  fc.tol_stat = cfg.number("numerics", "tol_stat");
  fc.t_max = cfg.number("numerics", "t_max");
  fc.max_steps = static_cast<long long>(cfg.number("numerics", "max_steps"));
  fc.moving_window = cfg.flag("numerics", "moving_window");
  fc.extract_periods = cfg.integer("numerics", "extract_periods");
  if (fc.nodes_per_period < 4) throw ConfigError("numerics.nodes_per_period", "must be at least 4");
  if (!(fc.h_max > 0)) throw ConfigError("numerics.h_max", "must be positive");
  if (fc.dt < 0) throw ConfigError("numerics.dt", "must be non-negative");
  if (!(fc.t_max > 0)) throw ConfigError("numerics.t_max", "must be positive");
  if (!(fc.tol_puls > 0) || !(fc.tol_stat > 0)) throw ConfigError("numerics.tol_puls", "tolerances must be positive");
  if (fc.extract_periods < 1) throw ConfigError("numerics.extract_periods", "must be at least 1");
  return fc;
}

// ---------------------------------------------------------------------------
// Quenching scan

QuenchScan quench_scan(double delta, double mu, std::vector<double> lambdas, const FrontConfig& cfg,
                       int workers) {
  std::sort(lambdas.begin(), lambdas.end());
  QuenchScan out;
  out.records.resize(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < lambdas.size();) {
      QuenchRecord& rec = out.records[i];
      rec.lambda = lambdas[i];
      try {
        const ProblemInstance inst = make_xin_example(delta, lambdas[i], mu);
        const QuenchingResult q = classify_quenching(inst, cfg);
        rec.status = q.status;
        rec.c = q.c;
        rec.uncertainty = q.front.estimate.uncertainty;
        rec.stationary_residual = q.front.stationary_residual;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(workers, int(lambdas.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nw; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  // |c| along increasing |lambda|; records with errors are skipped.
  std::vector<const QuenchRecord*> by_abs;
  for (const auto& r : out.records)
    if (r.error.empty()) by_abs.push_back(&r);
  std::stable_sort(by_abs.begin(), by_abs.end(), [](const QuenchRecord* a, const QuenchRecord* b) {
    return std::abs(a->lambda) < std::abs(b->lambda);
  });
  for (std::size_t i = 1; i < by_abs.size(); ++i) {
    const double prev = std::abs(by_abs[i - 1]->c), cur = std::abs(by_abs[i]->c);
    const double slack = by_abs[i - 1]->uncertainty + by_abs[i]->uncertainty;
    if (cur > prev + slack) out.nonincreasing = false;
  }
  for (const auto& r : out.records) {
    if (r.status != FrontStatus::Stationary) continue;
    out.pinning_seen = true;
    if (!(r.stationary_residual < 1e-6)) out.stationary_consistent = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

class Emitter {
 public:
  Emitter(const ExperimentConfig& cfg, std::string dir, RunResult& res)
      : cfg_(cfg), dir_(std::move(dir)), res_(res) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  std::string path(const std::string& name) {
    const std::string p = (std::filesystem::path(dir_) / name).string();
    res_.artifacts.push_back(p);
    return p;
  }
  std::string tag() const { return "config_hash=" + cfg_.hash_hex() + " scenario=" + cfg_.scenario; }

  // Text file with a provenance header; body lines follow verbatim.
  void text(const std::string& name, const std::string& header, const std::string& body) {
    const std::string p = path(name);
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p + "'");
    out << "# " << tag() << "\n";
    if (!header.empty()) out << header;
    out << body;
    if (!out) throw Error("I/O error writing '" + p + "'");
  }

  void json(const std::string& name, nlohmann::json j) {
    const std::string p = path(name);
    j["config_hash"] = cfg_.hash_hex();
    j["scenario"] = cfg_.scenario;
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p + "'");
    out << j.dump(2) << "\n";
    if (!out) throw Error("I/O error writing '" + p + "'");
  }

  void line(const std::string& s) { res_.summary.push_back(s); }

 private:
  const ExperimentConfig& cfg_;
  std::string dir_;
  RunResult& res_;
};

std::string front_summary(const std::string& label, const FrontSolution& f) {
  std::ostringstream s;
  s << label << " L=" << fmt(f.period) << " status=" << to_string(f.status);
  if (f.status == FrontStatus::Propagating)
    s << " c=" << fmt(f.speed) << " c_level=" << fmt(f.estimate.c_level)
      << " c_period=" << fmt(f.estimate.c_period) << " uncertainty=" << fmt(f.estimate.uncertainty)
      << " pulsating_defect=" << fmt(f.pulsating_error);
  else if (f.status == FrontStatus::Stationary)
    s << " c=0 stationary_residual=" << fmt(f.stationary_residual);
  else
    s << " (" << f.message << ")";
  return s.str();
}

nlohmann::json front_json(const FrontSolution& f, const ProblemInstance& inst) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["status"] = to_string(f.status);
  j["L"] = f.period;
  j["c"] = f.speed;
  j["c_level"] = num(f.estimate.c_level);
  j["c_period"] = num(f.estimate.c_period);
  j["uncertainty"] = num(f.estimate.uncertainty);
  j["period_uncertainty"] = num(f.estimate.period_uncertainty);
  j["pulsating_defect"] = num(f.pulsating_error);
  j["pulsating_defect_prev"] = num(f.pulsating_error_prev);
  j["stationary_residual"] = num(f.stationary_residual);
  j["replica_spread"] = num(f.replica_spread);
  j["mu1_fit"] = num(f.mu1_fit);
  j["mu2_fit"] = num(f.mu2_fit);
  j["t_end"] = f.t_end;
  j["steps"] = f.steps;
  j["dt"] = f.dt;
  j["h"] = f.h;
  j["message"] = f.message;
  if (f.status == FrontStatus::Propagating) {
    const IdentityReport id = verify_speed_identity(f, homogenized_data(inst).I_fbar);
    j["c_identity"] = id.c_identity;
    j["identity_mismatch"] = id.mismatch;
  }
  return j;
}

void emit_front(Emitter& em, const std::string& stem, const FrontSolution& f,
                const ProblemInstance& inst, int stride) {
  write_profile(em.path(stem + "_profile.dat"), f, stride, em.tag());
  std::ostringstream lv;
  for (std::size_t i = 0; i < f.level_t.size(); ++i)
    lv << fmt(f.level_t[i]) << ' ' << fmt(f.level_x[i]) << '\n';
  em.text(stem + "_level.dat", "# columns: t x_level\n", lv.str());
  std::ostringstream pr;
  for (const auto& p : f.probes)
    pr << fmt(p.t) << ' ' << fmt(p.c_hat) << ' ' << fmt(p.defect) << ' ' << fmt(p.residual) << ' '
       << fmt(p.displacement) << '\n';
  em.text(stem + "_probes.dat", "# columns: t c_hat pulsating_defect residual displacement\n", pr.str());
  em.json(stem + ".json", front_json(f, inst));
}

int run_front(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const FrontConfig fc = build_front_config(cfg);
  const int stride = cfg.integer("output", "profile_stride");
  const FrontSolution f = compute_pulsating_front(inst, fc);
  emit_front(em, "front", f, inst, stride);
  em.line(front_summary("front", f));
  if (cfg.flag("numerics", "mirror")) {
    const ProblemInstance m = mirror_instance(inst);
    const FrontSolution fm = compute_pulsating_front(m, fc);
    emit_front(em, "front_mirror", fm, m, stride);
    em.line(front_summary("front_mirror", fm));
  }
  return 0;
}

int run_homogenize(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  FrontConfig fc = build_front_config(cfg);
  std::vector<double> Ls = cfg.list("homogenize", "periods");
  if (Ls.empty()) throw ConfigError("homogenize.periods", "empty list");
  for (std::size_t i = 1; i < Ls.size(); ++i)
    if (!(Ls[i] < Ls[i - 1])) throw ConfigError("homogenize.periods", "must be strictly decreasing");
  const HomogenizationSweep sw = homogenization_sweep(inst, Ls, fc, cfg.integer("run", "workers"));
  em.text("homogenization.csv", "", homogenization_csv(sw.records));
  std::ostringstream prof;
  for (std::size_t i = 0; i < sw.front0.xi.size(); ++i)
    prof << fmt(sw.front0.xi[i]) << ' ' << fmt(sw.front0.phi[i]) << '\n';
  em.text("phi0.dat", "# c0=" + fmt(sw.front0.c0) + " a_H=" + fmt(sw.front0.a_H) + "\n# columns: xi phi0\n",
          prof.str());
  em.line("homogenized c0=" + fmt(sw.front0.c0) + " a_H=" + fmt(sw.front0.a_H) +
          " lambda1=" + fmt(sw.front0.lambda1) + " lambda2=" + fmt(sw.front0.lambda2));
  int code = 0;
  for (const auto& r : sw.records) {
    std::ostringstream s;
    s << "homogenize L=" << fmt(r.L) << " status=" << to_string(r.status) << " c_L=" << fmt(r.c_L)
      << " c_gap_rel=" << fmt(r.c_gap_rel) << " profile_gap_L2=" << fmt(r.profile_gap_L2);
    if (!r.error.empty()) {
      s << " error=" << r.error;
      code = 1;
    }
    em.line(s.str());
  }
  em.line(std::string("homogenize c_gap_decreasing=") + (sw.c_gap_decreasing ? "1" : "0") +
          " profile_gap_decreasing=" + (sw.profile_gap_decreasing ? "1" : "0"));
  return code;
}

StateFn eigen_state(const ExperimentConfig& cfg, const ProblemInstance& inst) {
  const std::string st = cfg.get("eigen", "state");
  if (st == "constant") {
    const double v = cfg.number("eigen", "state_value");
    return [v](double) { return v; };
  }
  if (st == "theta") {
    const double L = inst.period;
    auto th = inst.reaction.theta;
    return [th, L](double x) { return th(x / L); };
  }
  throw ConfigError("eigen.state", "unknown state '" + st + "'");
}

int run_eigen(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const StateFn ubar = eigen_state(cfg, inst);
  const std::string mode = cfg.get("eigen", "mode");
  const bool constant_potential = inst.homogeneous() && cfg.get("eigen", "state") == "constant";
  const double q = inst.dfdu_L(0.0, ubar(0.0));
  if (mode == "dirichlet") {
    const double R = cfg.number("eigen", "R");
    if (!(R > 0)) throw ConfigError("eigen.R", "must be positive");
    const EigenPair ep = dirichlet_principal_eigen(inst, ubar, R, cfg.integer("eigen", "nodes"));
    std::ostringstream b;
    for (std::size_t i = 0; i < ep.x.size(); ++i) b << fmt(ep.x[i]) << ' ' << fmt(ep.psi[i]) << '\n';
    em.text("eigen_dirichlet.dat", "# lambda1=" + fmt(ep.lambda) + " R=" + fmt(R) + "\n# columns: x psi\n",
            b.str());
    std::string s = "eigen dirichlet R=" + fmt(R) + " lambda1=" + fmt(ep.lambda) + " class=" +
                    to_string(classify_lambda(ep.lambda));
    if (constant_potential) {
      const double a = inst.coeff.a_max;
      s += " q=" + fmt(q) + " closed_form=" + fmt(q - a * std::pow(kPi / (2.0 * R), 2));
    }
    em.line(s);
  } else if (mode == "periodic") {
    const int N = cfg.integer("eigen", "periodic_nodes");
    if (N < 8) throw ConfigError("eigen.periodic_nodes", "need at least 8 nodes");
    std::vector<double> u(N);
    for (int i = 0; i < N; ++i) u[i] = ubar(inst.period * i / N);
    const EigenPair ep = periodic_principal_eigen(inst, u);
    std::ostringstream b;
    for (std::size_t i = 0; i < ep.x.size(); ++i) b << fmt(ep.x[i]) << ' ' << fmt(ep.psi[i]) << '\n';
    em.text("eigen_periodic.dat", "# lambda1=" + fmt(ep.lambda) + "\n# columns: x psi\n", b.str());
    std::string s = "eigen periodic lambda1=" + fmt(ep.lambda) + " class=" +
                    to_string(classify_lambda(ep.lambda));
    if (constant_potential) s += " q=" + fmt(q);
    em.line(s);
  } else if (mode == "trace") {
    const std::vector<double> Rs = cfg.list("eigen", "R_list");
    if (Rs.empty()) throw ConfigError("eigen.R_list", "empty list");
    for (std::size_t i = 1; i < Rs.size(); ++i)
      if (!(Rs[i] > Rs[i - 1])) throw ConfigError("eigen.R_list", "must be strictly increasing");
    const StabilityTrace tr = stability_limit(inst, ubar, Rs, cfg.number("eigen", "h"),
                                              cfg.integer("eigen", "periodic_nodes"));
    std::ostringstream b;
    for (std::size_t i = 0; i < tr.R.size(); ++i) b << fmt(tr.R[i]) << ' ' << fmt(tr.lambda[i]) << '\n';
    em.text("eigen_trace.dat", "# columns: R lambda1_R\n", b.str());
    for (std::size_t i = 0; i < tr.R.size(); ++i)
      em.line("eigen trace R=" + fmt(tr.R[i]) + " lambda1=" + fmt(tr.lambda[i]));
    em.line("eigen trace monotone=" + std::string(tr.monotone ? "1" : "0") +
            " periodic_lambda=" + fmt(tr.periodic_lambda) + " class=" + to_string(tr.cls));
  } else {
    throw ConfigError("eigen.mode", "unknown mode '" + mode + "'");
  }
  return 0;
}

NewtonConfig build_newton(const ExperimentConfig& cfg) {
  NewtonConfig nc;
  nc.nodes_per_period = cfg.integer("steady", "nodes_per_period");
  nc.h_max = cfg.number("steady", "h_max");
  nc.tol = cfg.number("steady", "tol");
  nc.max_iter = cfg.integer("steady", "max_iter");
  if (nc.nodes_per_period < 8) throw ConfigError("steady.nodes_per_period", "need at least 8 nodes");
  if (!(nc.tol > 0)) throw ConfigError("steady.tol", "must be positive");
  return nc;
}

int run_steady(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const SteadyStateSearch ss = find_periodic_steady_states(inst, default_seeds(inst), build_newton(cfg));
  std::ostringstream csv;
  csv << "index,seed,lambda1,class,residual,u_min,u_max\n";
  for (std::size_t k = 0; k < ss.states.size(); ++k) {
    const SteadyState& s = ss.states[k];
    const auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
    csv << k << ',' << s.seed << ',' << fmt(s.lambda1) << ',' << to_string(s.cls) << ','
        << fmt(s.residual) << ',' << fmt(*mn) << ',' << fmt(*mx) << '\n';
    write_steady_state(em.path("steady_" + std::to_string(k) + ".dat"), s, em.tag());
    em.line("steady state " + std::to_string(k) + " seed=" + s.seed + " lambda1=" + fmt(s.lambda1) +
            " class=" + to_string(s.cls) + " residual=" + fmt(s.residual));
  }
  em.text("steady_states.csv", "", csv.str());
  std::ostringstream seeds;
  for (const auto& o : ss.seeds)
    seeds << o.seed << ' ' << (o.converged ? 1 : 0) << ' ' << (o.rejected ? 1 : 0) << ' ' << o.note << '\n';
  em.text("steady_seeds.dat", "# columns: seed converged rejected note\n", seeds.str());
  em.line("steady states_found=" + std::to_string(ss.states.size()) +
          " seeds=" + std::to_string(ss.seeds.size()));
  return 0;
}

int run_scan(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const FrontConfig fc = build_front_config(cfg);
  std::vector<double> Ls = cfg.list("scan", "periods");
  if (Ls.empty()) throw ConfigError("scan.periods", "empty list");
  for (double L : Ls)
    if (!(L > 0)) throw ConfigError("scan.periods", "periods must be positive");
  const auto recs = scan_E(inst, Ls, fc, cfg.integer("run", "workers"));
  em.text("scan.csv", "", sweep_csv(recs));
  int code = 0;
  for (const auto& r : recs) {
    std::ostringstream s;
    s << "scan L=" << fmt(r.L) << " status=" << to_string(r.status) << " c_period=" << fmt(r.c_period)
      << " c_level=" << fmt(r.c_level) << " uncertainty=" << fmt(r.uncertainty)
      << " continuity_ok=" << (r.continuity_ok ? 1 : 0);
    if (!r.error.empty()) {
      s << " error=" << r.error;
      code = 1;
    }
    em.line(s.str());
  }
  return code;
}

int run_stability(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const FrontConfig fc = build_front_config(cfg);
  const FrontSolution f = compute_pulsating_front(inst, fc);
  em.line(front_summary("front", f));
  if (f.status != FrontStatus::Propagating)
    throw PreconditionError("stability scenario needs a propagating front; got " +
                            std::string(to_string(f.status)));
  StabilityConfig sc;
  sc.t_max = cfg.number("stability", "t_max");
  sc.probe_dt = cfg.number("stability", "probe_dt");
  sc.final_tol = cfg.number("stability", "final_tol");
  if (!(sc.t_max > 0) || !(sc.probe_dt > 0)) throw ConfigError("stability.t_max", "budget and probe interval must be positive");
  const double L = inst.period;
  const double shift = cfg.number("stability", "shift_periods") * L;
  const std::string datum = cfg.get("stability", "datum");
  StabilityReport rep;
  if (datum == "initialv2") {
    const SteadyStateSearch ss = find_periodic_steady_states(inst, default_seeds(inst), build_newton(cfg));
    if (ss.states.empty()) throw PreconditionError("no intermediate steady states found");
    auto mean = [](const SteadyState& s) {
      double m = 0;
      for (double v : s.u) m += v;
      return m / double(s.u.size());
    };
    const SteadyState* hi = &ss.states[0];
    const SteadyState* lo = &ss.states[0];
    for (const auto& s : ss.states) {
      if (mean(s) > mean(*hi)) hi = &s;
      if (mean(s) < mean(*lo)) lo = &s;
    }
    const double m = cfg.number("stability", "v2_margin");
    const SteadyState um = *hi, up = *lo;
    StateFn g = [um, up, m](double x) {
      return x < 0.0 ? std::min(1.0, steady_value(um, x) + m) : std::max(0.0, steady_value(up, x) - m);
    };
    rep = initialv2_experiment(inst, f, ss.states, um, up, g, sc);
  } else {
    StateFn g;
    if (datum == "perturbed") {
      const double amp = cfg.number("stability", "bump_amplitude");
      g = [&f, amp, L](double x) {
        const double s = (x - 2.0) / 2.0;
        const double bump = s * s < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0;
        return std::clamp(f(x, x / L) + amp * bump, 0.0, 1.0);
      };
    } else if (datum == "shifted") {
      g = [&f, shift, L](double x) { return f(x - shift, x / L); };
    } else if (datum == "step") {
      g = [](double x) { return x < 0.0 ? 1.0 : 0.0; };
    } else if (datum == "exact") {
      if (!inst.homogeneous() || cfg.get("profile", "family") == "tabulated")
        throw ConfigError("stability.datum", "the closed-form datum needs a homogeneous cubic instance");
      const double k = std::sqrt(cfg.number("profile", "scale") / (2.0 * inst.coeff.a_max));
      g = [k, shift](double x) { return 1.0 / (1.0 + std::exp(k * (x - shift))); };
    } else {
      throw ConfigError("stability.datum", "unknown datum '" + datum + "'");
    }
    rep = global_stability_experiment(inst, f, g, sc);
  }
  std::string spectrum_line;
  if (cfg.flag("stability", "spectrum")) {
    const SpectrumSummary sp = front_poincare_spectrum(
        inst, f, cfg.integer("stability", "spectrum_nodes"), cfg.number("stability", "spectrum_half_width"),
        cfg.integer("stability", "spectrum_modes"), cfg.integer("run", "workers"));
    rep.spectrum = sp.eigenvalues;
    spectrum_line = "spectrum unit_gap=" + fmt(sp.unit_gap) + " cosine=" + fmt(sp.cosine) +
                    " second_modulus=" + fmt(sp.second_modulus) + " ess_radius=" + fmt(sp.ess_radius) +
                    " flagged=" + std::to_string(sp.flagged);
  }
  nlohmann::json j = nlohmann::json::parse(stability_report_json(rep));
  for (auto kind : {SupersubKind::Super, SupersubKind::Sub}) {
    SuperSubSolution s = build_supersub(inst, kind, inst.reaction.lip_K, f.speed);
    squeeze_check(s, f);
    const std::string name = kind == SupersubKind::Super ? "super" : "sub";
    j["supersub"][name] = {{"c_drift", s.c_drift},     {"defect_min", s.defect_min},
                           {"defect_max", s.defect_max}, {"verified", s.verified},
                           {"squeeze_shift", s.squeeze_shift}, {"squeeze_ok", s.squeeze_ok}};
    em.line("supersub " + name + " defect_min=" + fmt(s.defect_min) + " defect_max=" + fmt(s.defect_max) +
            " verified=" + (s.verified ? "1" : "0"));
  }
  em.json("stability.json", j);
  std::ostringstream se;
  for (std::size_t k = 0; k < rep.t.size(); ++k)
    se << fmt(rep.t[k]) << ' ' << fmt(rep.sup_error[k]) << '\n';
  em.text("sup_errors.dat", "# tau_g=" + fmt(rep.tau_g) + " mu_fit=" + fmt(rep.mu_fit) + "\n# columns: t sup_error\n",
          se.str());
  std::ostringstream tau;
  for (std::size_t k = 0; k < rep.t.size(); ++k) tau << fmt(rep.t[k]) << ' ' << fmt(rep.tau[k]) << '\n';
  em.text("tau.dat", "# columns: t tau\n", tau.str());
  em.line("stability datum=" + datum + " accepted=" + (rep.accepted ? "1" : "0") + " tau_g=" +
          fmt(rep.tau_g) + " mu_fit=" + fmt(rep.mu_fit) + " final_error=" + fmt(rep.final_error) +
          " t_entry=" + fmt(rep.t_entry));
  if (!spectrum_line.empty()) em.line(spectrum_line);
  return 0;
}

int run_decay(const ExperimentConfig& cfg, Emitter& em) {
  const ProblemInstance inst = build_instance(cfg);
  const std::string pname = cfg.get("decay", "potential");
  DecayPotential pot;
  if (pname == "linearized") pot = DecayPotential::Linearized;
  else if (pname == "margin") pot = DecayPotential::Margin;
  else throw ConfigError("decay.potential", "unknown potential '" + pname + "'");
  double c = 0.0;
  double fit1 = std::nan(""), fit2 = std::nan("");
  if (!cfg.get("decay", "speed").empty()) {
    c = cfg.number("decay", "speed");
  } else {
    const FrontSolution f = compute_pulsating_front(inst, build_front_config(cfg));
    em.line(front_summary("front", f));
    if (f.status != FrontStatus::Propagating)
      throw PreconditionError("decay scenario needs a propagating front or an explicit decay.speed");
    c = f.speed;
    fit1 = f.mu1_fit;
    fit2 = f.mu2_fit;
  }
  const double mu_max = cfg.number("decay", "mu_max");
  const int nodes = cfg.integer("decay", "nodes");
  const DecayRoot right = decay_root_mu(inst, c, DecayDirection::Right, pot, mu_max, nodes);
  const DecayRoot left = decay_root_mu(inst, c, DecayDirection::Left, pot, mu_max, nodes);
  std::ostringstream b;
  for (std::size_t i = 0; i < right.mu_grid.size(); ++i)
    b << "right " << fmt(right.mu_grid[i]) << ' ' << fmt(right.lambda_grid[i]) << '\n';
  for (std::size_t i = 0; i < left.mu_grid.size(); ++i)
    b << "left " << fmt(left.mu_grid[i]) << ' ' << fmt(left.lambda_grid[i]) << '\n';
  em.text("decay.dat", "# c=" + fmt(c) + " potential=" + pname + "\n# columns: side mu lambda1(T_mu)\n", b.str());
  em.line("decay c=" + fmt(c) + " mu_right=" + fmt(right.mu) + " fit_right=" + fmt(fit1) +
          " mu_left=" + fmt(left.mu) + " fit_left=" + fmt(fit2));
  return 0;
}

int run_quench(const ExperimentConfig& cfg, Emitter& em) {
  if (cfg.get("profile", "family") != "xin")
    throw ConfigError("profile.family", "quench-scan needs family=xin");
  const std::vector<double> lambdas = cfg.list("quench", "lambdas");
  if (lambdas.empty()) throw ConfigError("quench.lambdas", "empty list");
  const double delta = cfg.number("profile", "xin_delta");
  const QuenchScan qs = quench_scan(delta, cfg.number("profile", "xin_mu"), lambdas,
                                    build_front_config(cfg), cfg.integer("run", "workers"));
  std::ostringstream csv;
  csv << "lambda,classification,c,uncertainty,stationary_residual,error\n";
  int code = 0;
  for (const auto& r : qs.records) {
    csv << fmt(r.lambda) << ',' << to_string(r.status) << ',' << fmt(r.c) << ',' << fmt(r.uncertainty)
        << ',' << fmt(r.stationary_residual) << ',' << r.error << '\n';
    std::string s = "quench lambda=" + fmt(r.lambda) + " status=" + to_string(r.status) + " c=" + fmt(r.c);
    if (!r.error.empty()) {
      s += " error=" + r.error;
      code = 1;
    }
    em.line(s);
  }
  em.text("quench.csv", "", csv.str());
  em.line(std::string("quench nonincreasing=") + (qs.nonincreasing ? "1" : "0") +
          " stationary_consistent=" + (qs.stationary_consistent ? "1" : "0") +
          " pinning_seen=" + (qs.pinning_seen ? "1" : "0"));
  return code;
}

}  // namespace

RunResult run_scenario(const ExperimentConfig& cfg, const std::string& out_dir) {
  RunResult res;
  try {
    Emitter em(cfg, out_dir, res);
    const std::string& s = cfg.scenario;
    if (s == "front") res.exit_code = run_front(cfg, em);
    else if (s == "homogenize") res.exit_code = run_homogenize(cfg, em);
    else if (s == "eigen") res.exit_code = run_eigen(cfg, em);
    else if (s == "steady") res.exit_code = run_steady(cfg, em);
    else if (s == "scan-e") res.exit_code = run_scan(cfg, em);
    else if (s == "stability") res.exit_code = run_stability(cfg, em);
    else if (s == "decay") res.exit_code = run_decay(cfg, em);
    else if (s == "quench-scan") res.exit_code = run_quench(cfg, em);
    else throw ConfigError("run.scenario", "unknown scenario '" + s + "'");
    std::ostringstream summary;
    for (const auto& l : res.summary) summary << l << '\n';
    em.text("summary.txt", "", summary.str());
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.error = e.what();
    res.error_kind = "config";
  } catch (const PreconditionError& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.error_kind = "precondition";
  } catch (const NumericalError& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.error_kind = "numerical";
  } catch (const Error& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.error_kind = "io";
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.error_kind = "internal";
  }
  return res;
}

}  // namespace pfront

#include "mfglq/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mfglq/graphon.hpp"

namespace mfglq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model",
       {"game_class", "populations", "weights", "A", "Abar", "B", "C", "Q", "Qbar",
        "S", "Q_T", "Qbar_T", "S_T", "sigma", "x0_mean", "x0_std"}},
      {"grid", {"horizon", "n_steps"}},
      {"graphon", {"kind", "c", "weights", "scale", "beta", "m_points"}},
      {"solver", {"method", "tol", "max_iter", "damping"}},
      {"simulate",
       {"n_players", "n_reps", "seed", "deviation_knots", "proportions", "sweep"}},
      {"output", {"dir"}},
  };
  return s;
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& raw) {
  try {
    size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size() || !std::isfinite(v)) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + raw + "'");
  }
}

long long parse_int(const std::string& section, const std::string& key,
                    const std::string& raw) {
  try {
    size_t used = 0;
    const long long v = std::stoll(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not an integer: '" + raw + "'");
  }
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(raw);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

struct Reader {
  const RawConfig& raw;

  const std::string* find(const std::string& sec, const std::string& key) const {
    return raw.find(sec, key);
  }
  double number(const std::string& sec, const std::string& key, double dflt) const {
    const std::string* v = find(sec, key);
    return v ? parse_double(sec, key, *v) : dflt;
  }
  double required_number(const std::string& sec, const std::string& key) const {
    const std::string* v = find(sec, key);
    if (!v) throw ConfigError("[" + sec + "] missing required key '" + key + "'");
    return parse_double(sec, key, *v);
  }
  long long integer(const std::string& sec, const std::string& key,
                    long long dflt) const {
    const std::string* v = find(sec, key);
    return v ? parse_int(sec, key, *v) : dflt;
  }
  std::string word(const std::string& sec, const std::string& key,
                   const std::string& dflt) const {
    const std::string* v = find(sec, key);
    return v ? *v : dflt;
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key) const {
    const std::string* v = find(sec, key);
    std::vector<double> out;
    if (!v) return out;
    for (const std::string& item : split_list(*v)) {
      out.push_back(parse_double(sec, key, item));
    }
    if (out.empty()) throw ConfigError("[" + sec + "] " + key + ": empty list");
    return out;
  }
};

Eigen::MatrixXd square_matrix(const std::string& sec, const std::string& key,
                              const std::vector<double>& flat) {
  const int k = static_cast<int>(std::lround(std::sqrt(double(flat.size()))));
  if (k < 1 || static_cast<size_t>(k) * k != flat.size()) {
    throw ConfigError("[" + sec + "] " + key + ": length " +
                      std::to_string(flat.size()) + " is not a square matrix");
  }
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = flat[i * k + j];
  }
  return m;
}

// Per-component coefficient lists; scalars broadcast to all components.
std::vector<LqCoefficients> read_coefficients(const Reader& rd, int dim) {
  std::vector<LqCoefficients> out(dim);
  auto fill = [&](const char* key, double LqCoefficients::* field) {
    const std::vector<double> vals = rd.numbers("model", key);
    if (vals.empty()) return;
    if (vals.size() != 1 && static_cast<int>(vals.size()) != dim) {
      throw ConfigError(std::string("[model] ") + key + ": expected 1 or " +
                        std::to_string(dim) + " values, got " +
                        std::to_string(vals.size()));
    }
    for (int i = 0; i < dim; ++i) {
      out[i].*field = vals.size() == 1 ? vals[0] : vals[i];
    }
  };
  fill("A", &LqCoefficients::A);
  fill("Abar", &LqCoefficients::Abar);
  fill("B", &LqCoefficients::B);
  fill("C", &LqCoefficients::C);
  fill("Q", &LqCoefficients::Q);
  fill("Qbar", &LqCoefficients::Qbar);
  fill("S", &LqCoefficients::S);
  fill("Q_T", &LqCoefficients::Q_T);
  fill("Qbar_T", &LqCoefficients::Qbar_T);
  fill("S_T", &LqCoefficients::S_T);
  fill("sigma", &LqCoefficients::sigma);
  fill("x0_mean", &LqCoefficients::x0_mean);
  fill("x0_std", &LqCoefficients::x0_std);
  return out;
}

int coefficient_dim(const Reader& rd) {
  size_t dim = 1;
  for (const char* key : {"A", "Abar", "B", "C", "Q", "Qbar", "S", "Q_T", "Qbar_T",
                          "S_T", "sigma", "x0_mean", "x0_std"}) {
    dim = std::max(dim, rd.numbers("model", key).size());
  }
  return static_cast<int>(dim);
}

GraphonSpec read_graphon(const Reader& rd) {
  const std::string kind = rd.word("graphon", "kind", "");
  if (kind.empty()) throw ConfigError("[graphon] missing required key 'kind'");
  if (kind == "constant") {
    return GraphonSpec::constant(rd.required_number("graphon", "c"));
  }
  if (kind == "step") {
    const std::vector<double> flat = rd.numbers("graphon", "weights");
    if (flat.empty()) throw ConfigError("[graphon] step kind needs 'weights'");
    const Eigen::MatrixXd w = square_matrix("graphon", "weights", flat);
    const double scale = rd.number("graphon", "scale", double(w.rows()));
    return GraphonSpec::step(w, scale);
  }
  if (kind == "min") return GraphonSpec::min_kernel();
  if (kind == "exp_decay") {
    const double beta = rd.required_number("graphon", "beta");
    if (beta < 0.0) throw ConfigError("[graphon] beta must be >= 0");
    return GraphonSpec::exp_decay(beta);
  }
  throw ConfigError("[graphon] unknown kind '" + kind + "'");
}

void report_validation(const std::vector<std::string>& issues) {
  if (issues.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& s : issues) msg += " " + s + ";";
  throw ConfigError(msg);
}

}  // namespace

bool RawConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const std::string* RawConfig::find(const std::string& section,
                                   const std::string& key) const {
  const auto sit = sections.find(section);
  if (sit == sections.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

RawConfig parse_config_text(const std::string& text) {
  RawConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (schema().find(section) == schema().end()) {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      }
      if (cfg.sections.count(section)) {
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" +
                          section + "]");
      }
      cfg.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (!schema().at(section).count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in section [" + section + "]");
    }
    if (cfg.sections[section].count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "'");
    }
    cfg.sections[section][key] = value;
  }
  return cfg;
}

RawConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

RunConfig build_run_config(const RawConfig& raw) {
  const Reader rd{raw};
  RunConfig cfg;

  if (!raw.sections.count("model")) throw ConfigError("missing [model] section");
  if (!raw.sections.count("grid")) throw ConfigError("missing [grid] section");

  const std::string game = rd.word("model", "game_class", "");
  if (game == "mfg") {
    cfg.game = GameClass::Mfg;
  } else if (game == "mpmfg") {
    cfg.game = GameClass::Mpmfg;
  } else if (game == "gmfg") {
    cfg.game = GameClass::Gmfg;
  } else {
    throw ConfigError("[model] game_class must be mfg, mpmfg, or gmfg (got '" +
                      game + "')");
  }

  const double horizon = rd.required_number("grid", "horizon");
  const long long n_steps = rd.integer("grid", "n_steps", -1);
  if (n_steps < 0) throw ConfigError("[grid] missing required key 'n_steps'");
  try {
    cfg.grid = make_grid(horizon, static_cast<int>(n_steps));
  } catch (const InvalidGridError& e) {
    throw ConfigError(std::string("[grid] ") + e.what());
  }

  // Component count: explicit 'populations', else the weight matrix size,
  // else the longest coefficient list.
  int dim = static_cast<int>(rd.integer("model", "populations", 0));
  const std::vector<double> wflat = rd.numbers("model", "weights");
  if (dim <= 0 && !wflat.empty() && cfg.game != GameClass::Gmfg) {
    dim = static_cast<int>(std::lround(std::sqrt(double(wflat.size()))));
  }
  if (dim <= 0) dim = coefficient_dim(rd);
  if (cfg.game == GameClass::Mfg && dim != 1) {
    throw ConfigError("[model] game_class mfg requires exactly one population");
  }

  const std::vector<LqCoefficients> coeffs = read_coefficients(rd, dim);

  if (cfg.game == GameClass::Gmfg) {
    if (!raw.sections.count("graphon")) {
      throw ConfigError("game_class gmfg requires the [graphon] section");
    }
    GraphonModel gm;
    gm.coeffs = coeffs;
    gm.graphon = read_graphon(rd);
    const long long m = rd.integer("graphon", "m_points", 0);
    if (m < 1) throw ConfigError("[graphon] missing or invalid 'm_points'");
    gm.m_points = static_cast<int>(m);
    cfg.m_points = gm.m_points;
    report_validation(validate(gm));
    cfg.model = gm;
  } else {
    PopulationModel pm;
    pm.coeffs = coeffs;
    if (wflat.empty()) {
      if (dim != 1) throw ConfigError("[model] weights required for K > 1");
      pm.weights = Eigen::MatrixXd::Ones(1, 1);
    } else {
      pm.weights = square_matrix("model", "weights", wflat);
      if (pm.weights.rows() != dim) {
        throw ConfigError("[model] weights is " + std::to_string(pm.weights.rows()) +
                          "x" + std::to_string(pm.weights.cols()) + " but K = " +
                          std::to_string(dim));
      }
    }
    report_validation(validate(pm));
    cfg.pop = pm;
    cfg.model = pm;
    if (raw.sections.count("graphon")) {
      const long long m = rd.integer("graphon", "m_points", 0);
      if (m > 0) cfg.m_points = static_cast<int>(m);
    }
  }

  cfg.solver.method = rd.word("solver", "method", "picard");
  if (cfg.solver.method != "picard" && cfg.solver.method != "newton") {
    throw ConfigError("[solver] method must be picard or newton");
  }
  cfg.solver.tol = rd.number("solver", "tol", 1e-9);
  cfg.solver.max_iter = static_cast<int>(rd.integer("solver", "max_iter", 500));
  cfg.solver.damping = rd.number("solver", "damping", 0.5);
  if (!(cfg.solver.tol > 0.0) || cfg.solver.max_iter < 1 ||
      !(cfg.solver.damping > 0.0) || cfg.solver.damping > 1.0) {
    throw ConfigError("[solver] tol must be > 0, max_iter >= 1, damping in (0, 1]");
  }

  cfg.sim.n_players = static_cast<int>(rd.integer("simulate", "n_players", 100));
  cfg.sim.n_reps = static_cast<int>(rd.integer("simulate", "n_reps", 1));
  cfg.sim.deviation_knots =
      static_cast<int>(rd.integer("simulate", "deviation_knots", 5));
  if (const std::string* v = raw.find("simulate", "seed")) {
    try {
      if (v->empty() || v->front() == '-') throw std::invalid_argument(*v);
      size_t used = 0;
      cfg.sim.seed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
    } catch (const std::exception&) {
      throw ConfigError("[simulate] seed: not an unsigned integer: '" + *v + "'");
    }
  }
  cfg.sim.proportions = rd.numbers("simulate", "proportions");
  for (double n : rd.numbers("simulate", "sweep")) {
    if (n < 2 || n != std::floor(n)) {
      throw ConfigError("[simulate] sweep entries must be integers >= 2");
    }
    cfg.sweep.push_back(static_cast<int>(n));
  }
  if (cfg.sim.n_players < 1 || cfg.sim.n_reps < 1 || cfg.sim.deviation_knots < 1) {
    throw ConfigError("[simulate] n_players, n_reps, deviation_knots must be >= 1");
  }

  cfg.out_dir = rd.word("output", "dir", "out");

  for (const char* sec : {"model", "grid", "graphon", "solver", "simulate", "output"}) {
    const auto it = raw.sections.find(sec);
    if (it == raw.sections.end()) continue;
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : it->second) obj[k] = v;
    cfg.echo[sec] = obj;
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return build_run_config(parse_config_file(path));
}

}  // namespace mfglq

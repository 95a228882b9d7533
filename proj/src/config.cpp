#include "etpc/config.hpp"

#include "etpc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace etpc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------

IniDocument IniDocument::parse(const std::string& text) {
  IniDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line);
      doc.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    if (section.empty()) throw ConfigError("key outside of any section", line);
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line);
    auto& entries = doc.sections_[section];
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    entries[key] = Entry{trim(s.substr(eq + 1)), line};
  }
  return doc;
}

void IniDocument::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
    throw ConfigError("override key '" + dotted_key + "' must look like section.key");
  sections_[trim(dotted_key.substr(0, dot))][trim(dotted_key.substr(dot + 1))] =
      Entry{trim(value), 0};
}

std::optional<IniDocument::Entry> IniDocument::get(const std::string& section,
                                                   const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

// ---------------------------------------------------------------------------

namespace {

class Reader {
 public:
  explicit Reader(const IniDocument& doc) : doc_(doc) {}

  void check_known_keys() const {
    static const std::map<std::string, std::set<std::string>> known = {
        {"plant",
         {"preset", "disturbance", "n", "m", "q", "lyapunov_matrix", "alpha1", "alpha2",
          "alpha3", "rho1", "rho2", "disturbance_bound"}},
        {"basis", {"kind", "degree", "horizon", "file"}},
        {"trigger", {"sigma", "r", "theta", "nu0", "omega"}},
        {"sim",
         {"mode", "step", "rollout_samples", "t_max", "event_tolerance", "refresh_horizon",
          "max_events", "x0"}},
        {"experiment",
         {"modes", "horizons", "degrees", "initial_conditions", "radius", "events_cap", "seed",
          "t_max"}},
    };
    static const std::regex indexed("(f|gamma|d)[1-9][0-9]*");
    for (const auto& [section, entries] : doc_.sections()) {
      const auto it = known.find(section);
      if (it == known.end()) {
        const int line = entries.empty() ? 0 : entries.begin()->second.line;
        throw ConfigError("unknown section [" + section + "]", line);
      }
      for (const auto& [key, entry] : entries) {
        if (it->second.count(key)) continue;
        if (section == "plant" && std::regex_match(key, indexed)) continue;
        throw ConfigError("unknown key '" + key + "' in [" + section + "]", entry.line);
      }
    }
  }

  bool has(const std::string& s, const std::string& k) const { return doc_.get(s, k).has_value(); }

  std::string text(const std::string& s, const std::string& k, const std::string& dflt) const {
    const auto e = doc_.get(s, k);
    return e ? e->value : dflt;
  }

  double number(const std::string& s, const std::string& k, double dflt) const {
    const auto e = doc_.get(s, k);
    if (!e) return dflt;
    return parse_number(e->value, *e, s, k);
  }

  long integer(const std::string& s, const std::string& k, long dflt) const {
    const auto e = doc_.get(s, k);
    if (!e) return dflt;
    const double v = parse_number(e->value, *e, s, k);
    if (v != std::floor(v)) fail(*e, s, k, "expected an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& s, const std::string& k, bool dflt) const {
    const auto e = doc_.get(s, k);
    if (!e) return dflt;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    fail(*e, s, k, "expected on/off");
  }

  std::vector<double> numbers(const std::string& s, const std::string& k,
                              std::vector<double> dflt) const {
    const auto e = doc_.get(s, k);
    if (!e) return dflt;
    std::vector<double> out;
    for (const auto& item : split(e->value, ',')) out.push_back(parse_number(item, *e, s, k));
    if (out.empty()) fail(*e, s, k, "expected a list of numbers");
    return out;
  }

  std::optional<PowerLaw> power_law(const std::string& s, const std::string& k) const {
    const auto e = doc_.get(s, k);
    if (!e) return std::nullopt;
    const auto parts = split(e->value, ',');
    if (parts.size() != 2) fail(*e, s, k, "expected 'coefficient, exponent'");
    try {
      return PowerLaw(parse_number(parts[0], *e, s, k), parse_number(parts[1], *e, s, k));
    } catch (const DomainError& err) {
      fail(*e, s, k, err.what());
    }
  }

  /// `amp:freq, amp:freq, ...`; `0` or empty means no terms.
  std::vector<Sinusoid> sinusoids(const std::string& s, const std::string& k) const {
    const auto e = doc_.get(s, k);
    std::vector<Sinusoid> out;
    if (!e || e->value.empty() || e->value == "0") return out;
    for (const auto& item : split(e->value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail(*e, s, k, "expected 'amplitude:frequency' terms");
      out.push_back(Sinusoid{parse_number(item.substr(0, colon), *e, s, k),
                             parse_number(item.substr(colon + 1), *e, s, k)});
    }
    return out;
  }

  Mat matrix(const std::string& s, const std::string& k, int n) const {
    const auto e = doc_.get(s, k);
    if (!e) fail(IniDocument::Entry{}, s, k, "is required");
    const auto rows = split(e->value, ';');
    if (int(rows.size()) != n) fail(*e, s, k, "expected " + std::to_string(n) + " rows");
    Mat out(n, n);
    for (int i = 0; i < n; ++i) {
      const auto cols = split(rows[std::size_t(i)], ',');
      if (int(cols.size()) != n) fail(*e, s, k, "expected " + std::to_string(n) + " columns");
      for (int j = 0; j < n; ++j) out(i, j) = parse_number(cols[std::size_t(j)], *e, s, k);
    }
    return out;
  }

  std::vector<ControllerMode> modes(const std::string& s, const std::string& k,
                                    std::vector<ControllerMode> dflt) const {
    const auto e = doc_.get(s, k);
    if (!e) return dflt;
    std::vector<ControllerMode> out;
    for (const auto& item : split(e->value, ',')) {
      try {
        out.push_back(parse_mode(item));
      } catch (const DomainError& err) {
        fail(*e, s, k, err.what());
      }
    }
    if (out.empty()) fail(*e, s, k, "expected at least one mode");
    return out;
  }

  int line(const std::string& s, const std::string& k) const {
    const auto e = doc_.get(s, k);
    return e ? e->line : 0;
  }

 private:
  [[noreturn]] void fail(const IniDocument::Entry& e, const std::string& s, const std::string& k,
                         const std::string& what) const {
    throw ConfigError(s + "." + k + ": " + what, e.line);
  }

  double parse_number(const std::string& raw, const IniDocument::Entry& e, const std::string& s,
                      const std::string& k) const {
    const std::string v = trim(raw);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      fail(e, s, k, "'" + v + "' is not a number");
    }
  }

  const IniDocument& doc_;
};

}  // namespace

// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& what, int line) {
  if (!ok) throw ConfigError(what, line);
}

std::string join_powerlaw(const PowerLaw& f) { return fmt(f.coeff()) + ", " + fmt(f.exponent()); }

std::string join_sinusoids(const std::vector<Sinusoid>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ", ";
    out += fmt(terms[i].amplitude) + ":" + fmt(terms[i].frequency);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += f(items[i]);
  }
  return out;
}

}  // namespace

RunConfig load_config(const std::string& text, const std::vector<std::string>& overrides) {
  IniDocument doc = IniDocument::parse(text);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' must be key=value");
    doc.set(o.substr(0, eq), o.substr(eq + 1));
  }
  const Reader rd(doc);
  rd.check_known_keys();

  RunConfig cfg;

  // [plant]
  auto& pl = cfg.plant;
  pl.preset = rd.text("plant", "preset", "lorenz");
  require(pl.preset == "lorenz" || pl.preset == "vanderpol" || pl.preset == "polynomial",
          "plant.preset must be lorenz, vanderpol or polynomial", rd.line("plant", "preset"));
  pl.disturbance = rd.flag("plant", "disturbance", true);
  pl.alpha1 = rd.power_law("plant", "alpha1");
  pl.alpha2 = rd.power_law("plant", "alpha2");
  pl.alpha3 = rd.power_law("plant", "alpha3");
  pl.rho1 = rd.power_law("plant", "rho1");
  pl.rho2 = rd.power_law("plant", "rho2");
  if (rd.has("plant", "disturbance_bound")) {
    pl.disturbance_bound = rd.number("plant", "disturbance_bound", 0.0);
    require(*pl.disturbance_bound >= 0.0, "plant.disturbance_bound must be >= 0",
            rd.line("plant", "disturbance_bound"));
  }
  if (pl.preset == "polynomial") {
    pl.n = int(rd.integer("plant", "n", 0));
    pl.m = int(rd.integer("plant", "m", 0));
    pl.q = int(rd.integer("plant", "q", 0));
    require(pl.n >= 1 && pl.m >= 1 && pl.q >= 1, "polynomial plant needs n, m, q >= 1",
            rd.line("plant", "n"));
    for (int i = 1; i <= pl.n; ++i) {
      const std::string key = "f" + std::to_string(i);
      require(rd.has("plant", key), "polynomial plant is missing plant." + key, 0);
      pl.dynamics.push_back(rd.text("plant", key, ""));
    }
    for (int i = 1; i <= pl.m; ++i) {
      const std::string key = "gamma" + std::to_string(i);
      require(rd.has("plant", key), "polynomial plant is missing plant." + key, 0);
      pl.feedback.push_back(rd.text("plant", key, ""));
    }
    pl.lyapunov_matrix = rd.matrix("plant", "lyapunov_matrix", pl.n);
    require(pl.alpha1 && pl.alpha2 && pl.alpha3 && pl.rho1 && pl.rho2,
            "polynomial plant needs alpha1, alpha2, alpha3, rho1 and rho2", 0);
    require(pl.disturbance_bound.has_value(), "polynomial plant needs disturbance_bound", 0);
  } else {
    pl.n = pl.preset == "lorenz" ? 3 : 2;
    pl.m = 1;
    pl.q = pl.n;
  }
  for (const auto& [key, entry] : doc.sections().count("plant") ? doc.sections().at("plant")
                                                                 : std::map<std::string, IniDocument::Entry>{}) {
    if (key.size() >= 2 && (key[0] == 'f' || key.rfind("gamma", 0) == 0) && pl.preset != "polynomial" &&
        std::isdigit(static_cast<unsigned char>(key.back())))
      throw ConfigError("plant." + key + " is only valid for polynomial plants", entry.line);
    if (key[0] == 'd' && key != "disturbance" && key != "disturbance_bound") {
      const int idx = std::stoi(key.substr(1));
      require(idx >= 1 && idx <= pl.q, "plant." + key + " exceeds the disturbance dimension",
              entry.line);
    }
  }
  bool any_channel = false;
  for (int i = 1; i <= pl.q; ++i) any_channel |= rd.has("plant", "d" + std::to_string(i));
  if (any_channel) {
    SinusoidalDisturbance sig;
    for (int i = 1; i <= pl.q; ++i) sig.channels.push_back(rd.sinusoids("plant", "d" + std::to_string(i)));
    pl.disturbance_signal = std::move(sig);
  }

  // [basis]
  cfg.basis.kind = rd.text("basis", "kind", "monomial");
  require(cfg.basis.kind == "monomial" || cfg.basis.kind == "tabulated",
          "basis.kind must be monomial or tabulated", rd.line("basis", "kind"));
  cfg.basis.degree = int(rd.integer("basis", "degree", 3));
  require(cfg.basis.degree >= 0 && cfg.basis.degree <= 15, "basis.degree must lie in [0, 15]",
          rd.line("basis", "degree"));
  cfg.basis.horizon = rd.number("basis", "horizon", 0.1);
  require(cfg.basis.horizon > 0.0, "basis.horizon must be > 0", rd.line("basis", "horizon"));
  cfg.basis.file = rd.text("basis", "file", "");
  require(cfg.basis.kind != "tabulated" || !cfg.basis.file.empty(),
          "tabulated basis needs basis.file", rd.line("basis", "kind"));

  // [trigger]
  cfg.trigger.sigma = rd.number("trigger", "sigma", 0.4);
  require(cfg.trigger.sigma > 0.0 && cfg.trigger.sigma < 1.0, "trigger.sigma must lie in (0, 1)",
          rd.line("trigger", "sigma"));
  cfg.trigger.r = rd.number("trigger", "r", 0.25);
  require(cfg.trigger.r >= 0.0 && cfg.trigger.r < 1.0, "trigger.r must lie in [0, 1)",
          rd.line("trigger", "r"));
  cfg.trigger.dynamic.theta = rd.number("trigger", "theta", 1.0);
  require(cfg.trigger.dynamic.theta >= 0.0, "trigger.theta must be >= 0", rd.line("trigger", "theta"));
  cfg.trigger.dynamic.nu0 = rd.number("trigger", "nu0", 0.0);
  require(cfg.trigger.dynamic.nu0 >= 0.0, "trigger.nu0 must be >= 0", rd.line("trigger", "nu0"));
  if (auto omega = rd.power_law("trigger", "omega")) cfg.trigger.dynamic.omega = *omega;

  // [sim]
  cfg.sim_modes = rd.modes("sim", "mode", {ControllerMode::kEtpcStatic});
  cfg.sim.mode = cfg.sim_modes.front();
  cfg.sim.step = rd.number("sim", "step", 1e-3);
  cfg.sim.rollout_samples = int(rd.integer("sim", "rollout_samples", 201));
  cfg.sim.t_max = rd.number("sim", "t_max", 10.0);
  cfg.sim.event_tolerance = rd.number("sim", "event_tolerance", 1e-9);
  cfg.sim.refresh_horizon = rd.number("sim", "refresh_horizon", 0.0);
  const long max_events = rd.integer("sim", "max_events", 0);
  require(max_events >= 0, "sim.max_events must be >= 0", rd.line("sim", "max_events"));
  cfg.sim.max_events = std::size_t(max_events);
  try {
    cfg.sim.validate();
  } catch (const DomainError& err) {
    throw ConfigError(std::string("[sim] ") + err.what());
  }
  {
    std::vector<double> dflt(std::size_t(pl.n), 0.0);
    dflt[pl.n >= 2 ? 1 : 0] = 1.0;
    const auto x0 = rd.numbers("sim", "x0", dflt);
    require(int(x0.size()) == pl.n, "sim.x0 must have " + std::to_string(pl.n) + " entries",
            rd.line("sim", "x0"));
    cfg.x0 = Eigen::Map<const Vec>(x0.data(), Eigen::Index(x0.size()));
  }

  // [experiment]
  auto& ex = cfg.experiment;
  ex.modes = rd.modes("experiment", "modes", {ControllerMode::kEtpcStatic});
  ex.horizons = rd.numbers("experiment", "horizons", {0.4, 0.6, 0.8});
  for (double t : ex.horizons)
    require(t > 0.0, "experiment.horizons must be > 0", rd.line("experiment", "horizons"));
  ex.degrees.clear();
  for (double p : rd.numbers("experiment", "degrees", {3, 4, 5})) {
    require(p == std::floor(p) && p >= 0 && p <= 15, "experiment.degrees must be integers in [0, 15]",
            rd.line("experiment", "degrees"));
    ex.degrees.push_back(int(p));
  }
  ex.initial_conditions = int(rd.integer("experiment", "initial_conditions", 100));
  require(ex.initial_conditions >= 1, "experiment.initial_conditions must be >= 1",
          rd.line("experiment", "initial_conditions"));
  ex.radius = rd.number("experiment", "radius", 1.0);
  require(ex.radius > 0.0, "experiment.radius must be > 0", rd.line("experiment", "radius"));
  const long cap = rd.integer("experiment", "events_cap", 100);
  require(cap >= 1, "experiment.events_cap must be >= 1", rd.line("experiment", "events_cap"));
  ex.events_cap = std::size_t(cap);
  const long seed = rd.integer("experiment", "seed", 1);
  require(seed >= 0, "experiment.seed must be >= 0", rd.line("experiment", "seed"));
  ex.seed = std::uint64_t(seed);
  ex.t_max = rd.number("experiment", "t_max", 30.0);
  require(ex.t_max > 0.0, "experiment.t_max must be > 0", rd.line("experiment", "t_max"));

  // Building the plant surfaces polynomial syntax errors now.
  try {
    (void)cfg.build_plant();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(std::string("[plant] ") + err.what());
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_config(buf.str(), overrides);
  } catch (const ConfigError& err) {
    throw ConfigError(path + ": " + err.what());
  }
}

PlantModel RunConfig::build_plant() const {
  PlantModel p;
  if (plant.preset == "lorenz") {
    p = preset_lorenz();
  } else if (plant.preset == "vanderpol") {
    p = preset_vanderpol();
  } else {
    std::vector<Polynomial> f, g;
    for (const auto& s : plant.dynamics) f.push_back(Polynomial::parse(s, plant.n, plant.m, plant.q));
    for (const auto& s : plant.feedback) g.push_back(Polynomial::parse(s, plant.n, plant.m, plant.q));
    p = polynomial_plant("polynomial", plant.n, plant.m, plant.q, std::move(f), std::move(g),
                         plant.lyapunov_matrix,
                         IssCertificate{*plant.alpha1, *plant.alpha2, *plant.alpha3, *plant.rho1,
                                        *plant.rho2},
                         *plant.disturbance_bound, {});
  }
  if (plant.alpha1) p.certificate.alpha1 = *plant.alpha1;
  if (plant.alpha2) p.certificate.alpha2 = *plant.alpha2;
  if (plant.alpha3) p.certificate.alpha3 = *plant.alpha3;
  if (plant.rho1) p.certificate.rho1 = *plant.rho1;
  if (plant.rho2) p.certificate.rho2 = *plant.rho2;
  if (plant.disturbance_bound) p.disturbance_bound = *plant.disturbance_bound;
  if (plant.disturbance_signal) p.disturbance = *plant.disturbance_signal;
  if (!plant.disturbance) p = p.without_disturbance();
  return p;
}

BasisSet RunConfig::build_basis() const {
  if (basis.kind == "tabulated") return BasisSet::load_tabulated(basis.file, basis.horizon);
  return BasisSet::monomial(basis.degree, basis.horizon);
}

StaticEtrConfig RunConfig::build_trigger(const PlantModel& p) const {
  return StaticEtrConfig::make(p, trigger.sigma, trigger.r);
}

ExperimentSpec RunConfig::build_experiment(const PlantModel& p) const {
  ExperimentSpec spec;
  spec.plant = p;
  spec.modes = experiment.modes;
  spec.horizons = experiment.horizons;
  spec.degrees = experiment.degrees;
  spec.initial_conditions = experiment.initial_conditions;
  spec.radius = experiment.radius;
  spec.events_cap = experiment.events_cap;
  spec.seed = experiment.seed;
  spec.sigma = trigger.sigma;
  spec.r = trigger.r;
  spec.dynamic = trigger.dynamic;
  spec.sim = sim;
  spec.sim.t_max = experiment.t_max;
  spec.sim.max_events = 0;
  spec.sim.record_samples = false;
  return spec;
}

std::string RunConfig::manifest() const {
  // Resolve the preset so that every certificate value is explicit.
  RunConfig resolved = *this;
  resolved.plant.disturbance = true;
  const PlantModel p = resolved.build_plant();

  std::ostringstream out;
  out << "# fully resolved configuration; usable as --config\n";
  out << "[plant]\n";
  out << "preset = " << plant.preset << '\n';
  out << "disturbance = " << (plant.disturbance ? "on" : "off") << '\n';
  if (plant.preset == "polynomial") {
    out << "n = " << plant.n << "\nm = " << plant.m << "\nq = " << plant.q << '\n';
    for (std::size_t i = 0; i < plant.dynamics.size(); ++i)
      out << 'f' << i + 1 << " = " << plant.dynamics[i] << '\n';
    for (std::size_t i = 0; i < plant.feedback.size(); ++i)
      out << "gamma" << i + 1 << " = " << plant.feedback[i] << '\n';
    out << "lyapunov_matrix = ";
    for (Eigen::Index i = 0; i < plant.lyapunov_matrix.rows(); ++i) {
      if (i) out << "; ";
      for (Eigen::Index j = 0; j < plant.lyapunov_matrix.cols(); ++j)
        out << (j ? ", " : "") << fmt(plant.lyapunov_matrix(i, j));
    }
    out << '\n';
  }
  out << "alpha1 = " << join_powerlaw(p.certificate.alpha1) << '\n';
  out << "alpha2 = " << join_powerlaw(p.certificate.alpha2) << '\n';
  out << "alpha3 = " << join_powerlaw(p.certificate.alpha3) << '\n';
  out << "rho1 = " << join_powerlaw(p.certificate.rho1) << '\n';
  out << "rho2 = " << join_powerlaw(p.certificate.rho2) << '\n';
  out << "disturbance_bound = " << fmt(p.disturbance_bound) << '\n';
  for (int i = 0; i < p.q; ++i) {
    const std::vector<Sinusoid> none;
    const auto& terms =
        std::size_t(i) < p.disturbance.channels.size() ? p.disturbance.channels[std::size_t(i)] : none;
    out << 'd' << i + 1 << " = " << join_sinusoids(terms) << '\n';
  }

  out << "\n[basis]\n";
  out << "kind = " << basis.kind << '\n';
  out << "degree = " << basis.degree << '\n';
  out << "horizon = " << fmt(basis.horizon) << '\n';
  if (!basis.file.empty()) out << "file = " << basis.file << '\n';

  out << "\n[trigger]\n";
  out << "sigma = " << fmt(trigger.sigma) << '\n';
  out << "r = " << fmt(trigger.r) << '\n';
  out << "theta = " << fmt(trigger.dynamic.theta) << '\n';
  out << "nu0 = " << fmt(trigger.dynamic.nu0) << '\n';
  out << "omega = " << join_powerlaw(trigger.dynamic.omega) << '\n';

  out << "\n[sim]\n";
  out << "mode = " << join(sim_modes, [](ControllerMode m) { return std::string(to_string(m)); })
      << '\n';
  out << "step = " << fmt(sim.step) << '\n';
  out << "rollout_samples = " << sim.rollout_samples << '\n';
  out << "t_max = " << fmt(sim.t_max) << '\n';
  out << "event_tolerance = " << fmt(sim.event_tolerance) << '\n';
  out << "refresh_horizon = " << fmt(sim.refresh_horizon) << '\n';
  out << "max_events = " << sim.max_events << '\n';
  out << "x0 = "
      << join(std::vector<double>(x0.data(), x0.data() + x0.size()), [](double v) { return fmt(v); })
      << '\n';

  out << "\n[experiment]\n";
  out << "modes = "
      << join(experiment.modes, [](ControllerMode m) { return std::string(to_string(m)); }) << '\n';
  out << "horizons = " << join(experiment.horizons, [](double v) { return fmt(v); }) << '\n';
  out << "degrees = " << join(experiment.degrees, [](int v) { return std::to_string(v); }) << '\n';
  out << "initial_conditions = " << experiment.initial_conditions << '\n';
  out << "radius = " << fmt(experiment.radius) << '\n';
  out << "events_cap = " << experiment.events_cap << '\n';
  out << "seed = " << experiment.seed << '\n';
  out << "t_max = " << fmt(experiment.t_max) << '\n';
  return out.str();
}

}  // namespace etpc

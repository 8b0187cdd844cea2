#include "cskin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace cskin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
public:
  explicit Reader(const KeyValues& kv) {
    for (const auto& [k, v] : kv) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> real(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    double x = 0.0;
    const char* end = s->data() + s->size();
    auto [ptr, ec] = std::from_chars(s->data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) {
      throw ConfigError(key, "expected a finite number, got '" + *s + "'");
    }
    return x;
  }

  std::optional<std::uint64_t> integer(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    std::uint64_t x = 0;
    const char* end = s->data() + s->size();
    auto [ptr, ec] = std::from_chars(s->data(), end, x);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError(key, "expected a nonnegative integer, got '" + *s + "'");
    }
    return x;
  }

  std::optional<bool> boolean(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
    if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + *s + "'");
  }

private:
  std::map<std::string, std::string> values_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

// Fills a regime field from its init counterpart, or rejects a conflict.
void inherit(std::optional<double>& regime_value, const std::optional<double>& init_value,
             const std::string& key) {
  if (!init_value) return;
  if (!regime_value) {
    regime_value = init_value;
  } else if (*regime_value != *init_value) {
    throw ConfigError(key, "conflicts with the init section");
  }
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno), "expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno), "empty key");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, "override must look like key=value");
    auto key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(s, "override has an empty key");
    kv.emplace_back(std::move(key), trim(s.substr(eq + 1)));
  }
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "model.kappa",      "model.beta",        "init.variant",       "init.dim",
      "init.D",           "init.alpha",        "init.p_inf",         "init.scale",
      "init.recenter",    "grid.t0",           "grid.t_end",         "grid.dt",
      "grid.stride",      "regime.id",         "regime.beta",        "regime.kappa",
      "regime.gamma",     "regime.D",          "regime.alpha",       "regime.p_inf",
      "regime.C1",        "run.n",             "run.seed",           "run.outputs",
      "run.emit_plots",   "run.kernel",        "stability.perturbation", "stability.p",
      "stability.phase",  "stability.sliced",  "uniqueness.refine",
  };
  return keys;
}

RunConfig build_config(const KeyValues& kv) {
  const auto& known = known_config_keys();
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(k, "unknown key");
  }
  Reader r(kv);
  RunConfig c;

  const double kappa = r.real("model.kappa").value_or(1.0);
  const double beta = r.real("model.beta").value_or(0.0);
  require(kappa >= 0.0, "model.kappa", "must be nonnegative");
  require(beta >= 0.0 && beta <= 1.0, "model.beta", "must lie in [0, 1]");
  c.model = ModelParams(kappa, beta);

  if (auto v = r.str("init.variant")) {
    try {
      c.init.variant = init_variant_from_string(*v);
    } catch (const DomainError& e) {
      throw ConfigError("init.variant", e.what());
    }
  }
  if (auto d = r.integer("init.dim")) c.init.dim = *d;
  require(c.init.dim >= 1, "init.dim", "must be positive");
  c.init.D = r.real("init.D");
  c.init.alpha = r.real("init.alpha");
  c.init.p_inf = r.real("init.p_inf");
  if (auto s = r.real("init.scale")) c.init.scale = *s;
  if (auto rc = r.boolean("init.recenter")) c.init.recenter = *rc;
  switch (c.init.variant) {
    case InitVariant::PolynomialTail:
      require(c.init.D.has_value(), "init.D", "required for the polynomial variant");
      require(*c.init.D >= 2.0, "init.D", "must be at least 2");
      require(c.init.scale > 0.0, "init.scale", "must be positive");
      break;
    case InitVariant::CompactVelocity:
      require(c.init.p_inf.has_value(), "init.p_inf", "required for the compact_velocity variant");
      require(*c.init.p_inf > 0.0, "init.p_inf", "must be positive");
      [[fallthrough]];
    case InitVariant::ExponentialTail:
      require(c.init.alpha.has_value(), "init.alpha", "required for exponential positions");
      require(*c.init.alpha > 0.0, "init.alpha", "must be positive");
      break;
  }
  try {
    c.init.validate();
  } catch (const DomainError& e) {
    throw ConfigError("init", e.what());
  }

  c.grid.t0 = r.real("grid.t0").value_or(0.0);
  c.grid.t_end = r.real("grid.t_end").value_or(c.grid.t0 + 1.0);
  c.grid.dt = r.real("grid.dt").value_or(default_time_step(kappa));
  if (auto s = r.integer("grid.stride")) c.grid.snapshot_stride = *s;
  require(c.grid.t_end >= c.grid.t0, "grid.t_end", "must not precede grid.t0");
  require(c.grid.dt > 0.0, "grid.dt", "must be positive");
  require(c.grid.t_end == c.grid.t0 || c.grid.dt <= c.grid.t_end - c.grid.t0, "grid.dt",
          "exceeds the time horizon");
  require(c.grid.snapshot_stride >= 1, "grid.stride", "must be positive");

  if (auto id = r.integer("regime.id")) {
    require(*id >= 1 && *id <= 3, "regime.id", "must be 1, 2 or 3");
    RegimeSpec spec;
    spec.regime = static_cast<Regime>(*id);
    auto rb = r.real("regime.beta");
    auto rk = r.real("regime.kappa");
    require(!rb || *rb == beta, "regime.beta", "conflicts with model.beta");
    require(!rk || *rk == kappa, "regime.kappa", "conflicts with model.kappa");
    spec.beta = beta;
    spec.kappa = kappa;
    spec.gamma = r.real("regime.gamma");
    spec.D = r.real("regime.D");
    spec.alpha = r.real("regime.alpha");
    spec.p_inf = r.real("regime.p_inf");
    spec.C1 = r.real("regime.C1");
    // Regime 2 substitutes its own order, so init.D is not inherited there.
    if (spec.regime == Regime::PolynomialTail) inherit(spec.D, c.init.D, "regime.D");
    if (spec.regime != Regime::PolynomialTail) inherit(spec.alpha, c.init.alpha, "regime.alpha");
    if (spec.regime == Regime::CompactVelocity) inherit(spec.p_inf, c.init.p_inf, "regime.p_inf");
    try {
      spec.validate();
    } catch (const DomainError& e) {
      throw ConfigError("regime", e.what());
    }
    c.regime = spec;
  }

  if (auto n = r.integer("run.n")) c.n_particles = *n;
  require(c.n_particles >= 1, "run.n", "must be positive");
  if (auto s = r.integer("run.seed")) c.seed = *s;
  if (auto o = r.str("run.outputs")) c.outputs = *o;
  require(!c.outputs.empty(), "run.outputs", "must not be empty");
  if (auto p = r.boolean("run.emit_plots")) c.emit_plots = *p;
  if (auto k = r.str("run.kernel")) {
    try {
      c.kernel = kernel_mode_from_string(*k);
    } catch (const DomainError& e) {
      throw ConfigError("run.kernel", e.what());
    }
  }

  if (auto e = r.real("stability.perturbation")) c.perturbation = *e;
  if (auto p = r.real("stability.p")) c.stability_p = *p;
  require(c.stability_p >= 1.0, "stability.p", "must be at least 1");
  if (auto ph = r.str("stability.phase")) {
    try {
      c.stability_phase = phase_from_string(*ph);
    } catch (const DomainError& e) {
      throw ConfigError("stability.phase", e.what());
    }
  }
  if (auto s = r.boolean("stability.sliced")) c.stability_sliced = *s;
  if (auto f = r.integer("uniqueness.refine")) c.refine = *f;

  // Resolved echo in canonical key order.
  for (const auto& key : known) {
    if (auto v = r.str(key)) c.echo.emplace_back(key, *v);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  KeyValues kv = parse_key_values(in, path.string());
  apply_overrides(kv, overrides);
  return build_config(kv);
}

}  // namespace cskin

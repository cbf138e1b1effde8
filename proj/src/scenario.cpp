#include "ctflow/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ctflow/output.hpp"

namespace ctflow {

namespace pt = boost::property_tree;

std::string to_string(ScenarioModel model) {
  switch (model) {
    case ScenarioModel::EA:
      return "ea";
    case ScenarioModel::EAP:
      return "eap";
    case ScenarioModel::GeneralK:
      return "general";
    case ScenarioModel::GeneralKRefined:
      return "general_refined";
    case ScenarioModel::Isothermal:
      return "isothermal";
  }
  return "ea";
}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"kind", "sign", "psi_exp", "refined"}},
      {"psi", {"kind", "c", "gamma", "file"}},
      {"potential", {"kind", "k", "kprime_file", "kpp_file"}},
      {"ic", {"rho", "center", "width", "a", "b", "file", "u", "eps", "u_file"}},
      {"particles", {"n"}},
      {"integrator", {"dt0", "eta", "d_cap", "t_max", "dt_min", "store_every", "max_samples"}},
      {"sweep", {"eps_lo", "eps_hi", "tol_eps", "guard_factor"}},
      {"isothermal",
       {"A", "gamma", "C", "L", "nx", "T", "cfl", "rho_min", "snapshot_every", "bump_a",
        "bump_w", "bump_b"}},
      {"outputs", {"trajectory", "report", "fields"}},
      {"run", {"seed"}},
  };
  return keys;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Drops inline comments: ';' or '#' preceded by whitespace.
std::string strip_inline_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    }
    out << line << '\n';
  }
  return out.str();
}

class Reader {
 public:
  Reader(pt::ptree tree, std::filesystem::path base) : tree_(std::move(tree)), base_(std::move(base)) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!value) return std::nullopt;
    return value->data();
  }

  double real(const std::string& section, const std::string& key, double fallback) const {
    const auto text = raw(section, key);
    if (!text) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(*text, &used);
      if (used != text->size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ScenarioError("[" + section + "] " + key + ": not a finite number: '" + *text + "'");
    }
  }

  std::optional<double> optional_real(const std::string& section, const std::string& key) const {
    if (!raw(section, key)) return std::nullopt;
    return real(section, key, 0.0);
  }

  std::uint64_t integer(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    const auto text = raw(section, key);
    if (!text) return fallback;
    try {
      if (text->empty() || (*text)[0] == '-') throw std::invalid_argument("");
      std::size_t used = 0;
      const unsigned long long v = std::stoull(*text, &used);
      if (used != text->size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ScenarioError("[" + section + "] " + key + ": not a nonnegative integer: '" + *text + "'");
    }
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const auto text = raw(section, key);
    if (!text) return fallback;
    const std::string v = lower(*text);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ScenarioError("[" + section + "] " + key + ": expected true or false, got '" + *text + "'");
  }

  std::string word(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    const auto text = raw(section, key);
    return text ? lower(*text) : fallback;
  }

  std::filesystem::path file(const std::string& section, const std::string& key) const {
    const auto text = raw(section, key);
    if (!text || text->empty()) throw ScenarioError("[" + section + "] " + key + " is required");
    std::filesystem::path p(*text);
    return p.is_relative() ? base_ / p : p;
  }

  void check_keys() const {
    for (const auto& [section, body] : tree_) {
      const auto it = allowed_keys().find(section);
      if (it == allowed_keys().end()) {
        if (body.empty()) throw ScenarioError("key outside any section: " + section);
        throw ScenarioError("unknown section [" + section + "]");
      }
      for (const auto& [key, unused] : body) {
        (void)unused;
        if (!it->second.count(key)) throw ScenarioError("unknown key [" + section + "] " + key);
      }
    }
  }

 private:
  pt::ptree tree_;
  std::filesystem::path base_;
};

Tabulated load_table(const std::filesystem::path& path, Tabulated::Extrapolation ex) {
  try {
    return Tabulated::load(path, ex);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("table ") + path.string() + ": " + e.what());
  }
}

}  // namespace

CharModel Scenario::char_model() const {
  try {
    switch (model) {
      case ScenarioModel::EA:
        if (potential.kind() != InteractionPotential::Kind::None) break;
        return CharModel::ea(psi);
      case ScenarioModel::EAP:
        if (potential.kind() != InteractionPotential::Kind::Newtonian) break;
        return CharModel::eap(psi, potential.k());
      case ScenarioModel::GeneralK:
      case ScenarioModel::GeneralKRefined:
        return CharModel::general(psi, potential);
      case ScenarioModel::Isothermal:
        throw ScenarioError("isothermal scenario has no characteristic model");
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  throw ScenarioError("model " + to_string(model) + " does not pair with the given potential");
}

PotentialSign Scenario::general_sign() const {
  if (sign) return *sign;
  if (potential.kind() != InteractionPotential::Kind::Smooth) {
    throw ScenarioError("general model needs a smooth potential");
  }
  // Linear interpolation with zero extrapolation keeps K″ between its samples.
  bool nonneg = true;
  bool nonpos = true;
  for (double v : potential.kpp_table()->ys()) {
    if (v < 0.0) nonneg = false;
    if (v > 0.0) nonpos = false;
  }
  if (nonneg) return PotentialSign::Repulsive;
  if (nonpos) return PotentialSign::Attractive;
  throw ScenarioError(
      "K'' changes sign; set [model] sign explicitly or use kind = general_refined");
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream cleaned(strip_inline_comments(in));
    pt::ini_parser::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(std::string("scenario syntax: ") + e.what());
  }
  const Reader r(std::move(tree), base_dir);
  r.check_keys();

  Scenario s;
  std::vector<std::pair<std::string, std::string>> echo;
  auto put = [&echo](const std::string& key, const std::string& value) { echo.emplace_back(key, value); };
  auto putd = [&](const std::string& key, double v) { put(key, format_double(v)); };

  // [model]
  const std::string kind = r.word("model", "kind", "ea");
  if (kind == "ea") {
    s.model = ScenarioModel::EA;
  } else if (kind == "eap") {
    s.model = ScenarioModel::EAP;
  } else if (kind == "general") {
    s.model = ScenarioModel::GeneralK;
  } else if (kind == "general_refined") {
    s.model = ScenarioModel::GeneralKRefined;
  } else if (kind == "isothermal") {
    s.model = ScenarioModel::Isothermal;
  } else {
    throw ScenarioError("[model] kind: unknown model '" + kind + "'");
  }
  put("model.kind", to_string(s.model));
  const std::string sign = r.word("model", "sign", "auto");
  if (sign == "attractive") {
    s.sign = PotentialSign::Attractive;
  } else if (sign == "repulsive") {
    s.sign = PotentialSign::Repulsive;
  } else if (sign != "auto") {
    throw ScenarioError("[model] sign: expected auto, attractive or repulsive");
  }
  put("model.sign", sign);
  s.psi_exp = r.optional_real("model", "psi_exp");
  if (s.psi_exp) putd("model.psi_exp", *s.psi_exp);
  s.refined = r.boolean("model", "refined", true);
  put("model.refined", s.refined ? "true" : "false");

  if (!s.is_isothermal()) {
    // [psi]
    const std::string psi_kind = r.word("psi", "kind", "constant");
    try {
      if (psi_kind == "constant") {
        const double c = r.real("psi", "c", 1.0);
        s.psi = InfluenceFunction::constant(c);
        put("psi.kind", "constant");
        putd("psi.c", c);
      } else if (psi_kind == "cucker_smale") {
        const double g = r.real("psi", "gamma", 1.0);
        s.psi = InfluenceFunction::cucker_smale(g);
        put("psi.kind", "cucker_smale");
        putd("psi.gamma", g);
      } else if (psi_kind == "tabulated") {
        const auto path = r.file("psi", "file");
        s.psi = InfluenceFunction::tabulated(load_table(path, Tabulated::Extrapolation::Constant));
        put("psi.kind", "tabulated");
        put("psi.file", *r.raw("psi", "file"));
      } else {
        throw ScenarioError("[psi] kind: unknown influence function '" + psi_kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("[psi] ") + e.what());
    }

    // [potential]
    std::string default_potential = "none";
    if (s.model == ScenarioModel::EAP) default_potential = "newtonian";
    if (s.model == ScenarioModel::GeneralK || s.model == ScenarioModel::GeneralKRefined) {
      default_potential = "smooth";
    }
    const std::string pot = r.word("potential", "kind", default_potential);
    try {
      if (pot == "none") {
        s.potential = InteractionPotential::none();
        put("potential.kind", "none");
      } else if (pot == "newtonian") {
        const double k = r.real("potential", "k", -1.0);
        s.potential = InteractionPotential::newtonian(k);
        put("potential.kind", "newtonian");
        putd("potential.k", k);
      } else if (pot == "smooth") {
        const auto kp = r.file("potential", "kprime_file");
        const auto kpp = r.file("potential", "kpp_file");
        s.potential = InteractionPotential::smooth(
            load_table(kp, Tabulated::Extrapolation::Constant),
            load_table(kpp, Tabulated::Extrapolation::Zero));
        put("potential.kind", "smooth");
        put("potential.kprime_file", *r.raw("potential", "kprime_file"));
        put("potential.kpp_file", *r.raw("potential", "kpp_file"));
        putd("potential.B", s.potential.curvature_bound());
      } else {
        throw ScenarioError("[potential] kind: unknown potential '" + pot + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("[potential] ") + e.what());
    }

    // [ic]
    const std::string rho = r.word("ic", "rho", "gaussian");
    if (rho == "gaussian") {
      GaussianDensity g{r.real("ic", "center", 0.0), r.real("ic", "width", 1.0)};
      s.ic.rho0 = g;
      put("ic.rho", "gaussian");
      putd("ic.center", g.center);
      putd("ic.width", g.width);
    } else if (rho == "uniform") {
      UniformDensity u{r.real("ic", "a", 0.0), r.real("ic", "b", 1.0)};
      s.ic.rho0 = u;
      put("ic.rho", "uniform");
      putd("ic.a", u.a);
      putd("ic.b", u.b);
    } else if (rho == "tabulated") {
      s.ic.rho0 = TabulatedDensity{load_table(r.file("ic", "file"), Tabulated::Extrapolation::Zero)};
      put("ic.rho", "tabulated");
      put("ic.file", *r.raw("ic", "file"));
    } else {
      throw ScenarioError("[ic] rho: unknown density '" + rho + "'");
    }
    const std::string u = r.word("ic", "u", "slope_offset");
    if (u == "slope_offset") {
      s.ic.u0 = SlopeOffset{r.real("ic", "eps", 0.0)};
      put("ic.u", "slope_offset");
      putd("ic.eps", std::get<SlopeOffset>(s.ic.u0).eps);
    } else if (u == "explicit") {
      s.ic.u0 = ExplicitVelocity{load_table(r.file("ic", "u_file"), Tabulated::Extrapolation::Constant)};
      put("ic.u", "explicit");
      put("ic.u_file", *r.raw("ic", "u_file"));
    } else {
      throw ScenarioError("[ic] u: unknown velocity mode '" + u + "'");
    }

    // [particles]
    s.n = r.integer("particles", "n", s.n);
    if (s.n < 2) throw ScenarioError("[particles] n must be at least 2");
    put("particles.n", std::to_string(s.n));

    // [integrator]
    IntegratorConfig& ic = s.integrator;
    ic.dt0 = r.real("integrator", "dt0", ic.dt0);
    ic.eta = r.real("integrator", "eta", ic.eta);
    ic.d_cap = r.real("integrator", "d_cap", ic.d_cap);
    ic.t_max = r.real("integrator", "t_max", ic.t_max);
    ic.dt_min = r.real("integrator", "dt_min", ic.dt_min);
    ic.store_every = r.integer("integrator", "store_every", ic.store_every);
    ic.max_samples = r.integer("integrator", "max_samples", ic.max_samples);
    if (!(ic.dt0 > 0.0) || !(ic.eta > 0.0) || !(ic.d_cap > 0.0) || !(ic.t_max >= 0.0) ||
        !(ic.dt_min > 0.0) || ic.max_samples < 2) {
      throw ScenarioError("[integrator] needs dt0, eta, d_cap, dt_min > 0, t_max >= 0, max_samples >= 2");
    }
    putd("integrator.dt0", ic.dt0);
    putd("integrator.eta", ic.eta);
    putd("integrator.d_cap", ic.d_cap);
    putd("integrator.t_max", ic.t_max);
    putd("integrator.dt_min", ic.dt_min);
    put("integrator.store_every", std::to_string(ic.store_every));
    put("integrator.max_samples", std::to_string(ic.max_samples));

    // [sweep]
    SweepConfig& sw = s.sweep;
    sw.eps_lo = r.real("sweep", "eps_lo", sw.eps_lo);
    sw.eps_hi = r.real("sweep", "eps_hi", sw.eps_hi);
    sw.search.tol_eps = r.real("sweep", "tol_eps", sw.search.tol_eps);
    sw.search.guard_factor = r.real("sweep", "guard_factor", sw.search.guard_factor);
    if (!(sw.search.tol_eps > 0.0) || !(sw.search.guard_factor > 0.0)) {
      throw ScenarioError("[sweep] tol_eps and guard_factor must be positive");
    }
    putd("sweep.eps_lo", sw.eps_lo);
    putd("sweep.eps_hi", sw.eps_hi);
    putd("sweep.tol_eps", sw.search.tol_eps);
    putd("sweep.guard_factor", sw.search.guard_factor);

    s.char_model();  // pairing check
  } else {
    IsoConfig& c = s.iso;
    c.A = r.real("isothermal", "A", c.A);
    c.gamma = r.real("isothermal", "gamma", c.gamma);
    c.C = r.real("isothermal", "C", c.C);
    c.L = r.real("isothermal", "L", c.L);
    c.nx = r.integer("isothermal", "nx", c.nx);
    c.T = r.real("isothermal", "T", c.T);
    c.cfl = r.real("isothermal", "cfl", c.cfl);
    c.rho_min = r.real("isothermal", "rho_min", c.rho_min);
    c.snapshot_every = r.integer("isothermal", "snapshot_every", 25);
    s.bump.a = r.real("isothermal", "bump_a", s.bump.a);
    s.bump.w = r.real("isothermal", "bump_w", s.bump.w);
    s.bump.b = r.real("isothermal", "bump_b", s.bump.b);
    if (!(c.A >= 0.0) || !(c.C > 0.0) || !(c.L > 0.0) || c.nx < 3 || !(c.T >= 0.0) ||
        !(c.cfl > 0.0 && c.cfl <= 0.5) || c.snapshot_every == 0) {
      throw ScenarioError(
          "[isothermal] needs A >= 0, C > 0, L > 0, nx >= 3, T >= 0, 0 < cfl <= 0.5, snapshot_every >= 1");
    }
    if (c.gamma != 1.0) throw ScenarioError("[isothermal] the solver supports gamma = 1 only");
    putd("isothermal.A", c.A);
    putd("isothermal.gamma", c.gamma);
    putd("isothermal.C", c.C);
    putd("isothermal.L", c.L);
    put("isothermal.nx", std::to_string(c.nx));
    putd("isothermal.T", c.T);
    putd("isothermal.cfl", c.cfl);
    putd("isothermal.rho_min", c.rho_min);
    put("isothermal.snapshot_every", std::to_string(c.snapshot_every));
    putd("isothermal.bump_a", s.bump.a);
    putd("isothermal.bump_w", s.bump.w);
    putd("isothermal.bump_b", s.bump.b);
  }

  s.outputs.trajectory = r.boolean("outputs", "trajectory", true);
  s.outputs.report = r.boolean("outputs", "report", true);
  s.outputs.fields = r.boolean("outputs", "fields", true);
  put("outputs.trajectory", s.outputs.trajectory ? "true" : "false");
  put("outputs.report", s.outputs.report ? "true" : "false");
  put("outputs.fields", s.outputs.fields ? "true" : "false");

  s.seed = r.integer("run", "seed", 0);
  put("run.seed", std::to_string(s.seed));

  s.echo = std::move(echo);
  if (!s.is_isothermal()) {
    try {
      s.char_model().validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  return parse_scenario(in, path.parent_path());
}

Scenario default_scenario() {
  std::istringstream empty;
  return parse_scenario(empty);
}

}  // namespace ctflow

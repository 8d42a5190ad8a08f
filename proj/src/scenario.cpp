#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "integrate.hpp"

namespace ddtwa {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  std::string unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      if (!unknown.empty()) unknown += ", ";
      unknown += it.key();
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(context + ": unknown keys: " + unknown);
  }
}

double require_number(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ConfigError(context + ": missing numeric field '" + key + "'");
  }
  return obj[key].get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(context + ": '" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

CouplingAxis parse_axis_pair(const std::string& axis, const std::string& context) {
  if (axis == "xx") return CouplingAxis::xx;
  if (axis == "yy") return CouplingAxis::yy;
  if (axis == "zz") return CouplingAxis::zz;
  throw ConfigError(context + ": axis must be one of xx, yy, zz");
}

NoiseKind parse_noise_kind(const std::string& kind, const std::string& context) {
  if (kind == "dephasing_individual") return NoiseKind::dephasing_individual;
  if (kind == "dephasing_collective") return NoiseKind::dephasing_collective;
  if (kind == "dephasing_colored") return NoiseKind::dephasing_colored;
  if (kind == "decay_standard") return NoiseKind::decay_standard;
  if (kind == "decay_improved") return NoiseKind::decay_improved;
  if (kind == "decay_qle") return NoiseKind::decay_qle;
  if (kind == "cavity_loss") return NoiseKind::cavity_loss;
  throw ConfigError(context + ": unknown noise kind '" + kind + "'");
}

std::complex<double> parse_complex(const json& v, const std::string& context) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(context + ": expected a number or [re, im] pair");
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const json& doc) {
  check_keys(doc, "scenario",
             {"schema", "model", "noise", "initial", "run", "observables"});
  if (!doc.contains("schema") || !doc["schema"].is_string() ||
      doc["schema"].get<std::string>() != kScenarioSchema) {
    throw ConfigError(std::string("scenario: schema field must be \"") + kScenarioSchema + "\"");
  }

  ScenarioConfig cfg;

  // ---- model ----
  if (!doc.contains("model")) throw ConfigError("scenario: missing model block");
  const json& model = doc["model"];
  check_keys(model, "model", {"n", "lattice", "couplings", "fields", "disorder", "cavity"});

  if (model.contains("lattice")) {
    const json& lat = model["lattice"];
    check_keys(lat, "model.lattice", {"dims", "spacing"});
    if (!lat.contains("dims") || !lat["dims"].is_array() || lat["dims"].size() != 3) {
      throw ConfigError("model.lattice: dims must be an array of three integers");
    }
    std::array<int, 3> dims{};
    for (int k = 0; k < 3; ++k) {
      if (!lat["dims"][k].is_number_integer() || lat["dims"][k].get<int>() < 1) {
        throw ConfigError("model.lattice: dims entries must be positive integers");
      }
      dims[k] = lat["dims"][k].get<int>();
    }
    cfg.model.lattice = LatticeSpec::cubic(dims, number_or(lat, "spacing", 1.0, "model.lattice"));
  }

  if (model.contains("n")) {
    if (!model["n"].is_number_integer() || model["n"].get<long long>() < 1) {
      throw ConfigError("model: n must be a positive integer");
    }
    cfg.model.n = model["n"].get<std::size_t>();
    if (cfg.model.lattice && cfg.model.lattice->size() != cfg.model.n) {
      throw ConfigError("model: n does not match the lattice size");
    }
  } else if (cfg.model.lattice) {
    cfg.model.n = cfg.model.lattice->size();
  } else {
    throw ConfigError("model: either n or lattice must be given");
  }

  if (model.contains("couplings")) {
    if (!model["couplings"].is_array()) throw ConfigError("model.couplings: expected an array");
    for (const json& c : model["couplings"]) {
      check_keys(c, "model.couplings[]",
                 {"axis", "J", "alpha", "normalize_by_n", "cutoff_ratio", "pairs"});
      if (!c.contains("axis") || !c["axis"].is_string()) {
        throw ConfigError("model.couplings[]: missing axis");
      }
      const CouplingAxis axis = parse_axis_pair(c["axis"].get<std::string>(), "model.couplings[]");
      if (c.contains("pairs")) {
        if (c.contains("J") || c.contains("alpha")) {
          throw ConfigError("model.couplings[]: give either pairs or a power law, not both");
        }
        CouplingMatrix cm;
        cm.axis = axis;
        for (const json& p : c["pairs"]) {
          if (!p.is_array() || p.size() != 3) {
            throw ConfigError("model.couplings[].pairs: entries must be [i, j, J]");
          }
          const int i = p[0].get<int>();
          const int j = p[1].get<int>();
          const double v = p[2].get<double>();
          if (i == j) throw ConfigError("model.couplings[].pairs: no self couplings");
          if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= cfg.model.n ||
              static_cast<std::size_t>(j) >= cfg.model.n) {
            throw ConfigError("model.couplings[].pairs: index out of range");
          }
          cm.pair_i.push_back(std::min(i, j));
          cm.pair_j.push_back(std::max(i, j));
          cm.pair_val.push_back(v);
        }
        cfg.model.couplings.push_back(std::move(cm));
      } else {
        const double J = require_number(c, "J", "model.couplings[]");
        const double alpha = number_or(c, "alpha", 0.0, "model.couplings[]");
        const bool norm = bool_or(c, "normalize_by_n", false, "model.couplings[]");
        const double cutoff = number_or(c, "cutoff_ratio", 0.0, "model.couplings[]");
        if (alpha == 0.0) {
          CouplingMatrix cm;
          cm.axis = axis;
          cm.all_to_all = true;
          cm.uniform_strength = norm ? J / static_cast<double>(cfg.model.n) : J;
          cfg.model.couplings.push_back(std::move(cm));
        } else {
          if (!cfg.model.lattice) {
            throw ConfigError("model.couplings[]: power-law couplings need a lattice");
          }
          cfg.model.couplings.push_back(
              build_power_law_couplings(*cfg.model.lattice, axis, J, alpha, norm, cutoff));
        }
      }
    }
  }

  if (model.contains("fields")) {
    const json& f = model["fields"];
    check_keys(f, "model.fields", {"omega", "axis", "detuning"});
    const double omega = number_or(f, "omega", 0.0, "model.fields");
    std::string axis = "x";
    if (f.contains("axis")) {
      if (!f["axis"].is_string()) throw ConfigError("model.fields: axis must be a string");
      axis = f["axis"].get<std::string>();
    }
    if (axis == "x") {
      cfg.model.fields.uniform[0] = omega;
    } else if (axis == "y") {
      cfg.model.fields.uniform[1] = omega;
    } else if (axis == "z") {
      cfg.model.fields.uniform[2] = omega;
    } else {
      throw ConfigError("model.fields: axis must be one of x, y, z");
    }
    if (f.contains("detuning")) {
      if (!f["detuning"].is_array() || f["detuning"].size() != cfg.model.n) {
        throw ConfigError("model.fields: detuning must be an array of length n");
      }
      for (const json& v : f["detuning"]) cfg.model.fields.detuning_z.push_back(v.get<double>());
    }
  }

  if (model.contains("disorder")) {
    const json& d = model["disorder"];
    check_keys(d, "model.disorder", {"sigma2", "frozen"});
    cfg.model.disorder.sigma2 = number_or(d, "sigma2", 0.0, "model.disorder");
    cfg.model.disorder.frozen = bool_or(d, "frozen", false, "model.disorder");
    if (cfg.model.disorder.sigma2 < 0.0) {
      throw ConfigError("model.disorder: sigma2 must be >= 0");
    }
  }

  if (model.contains("cavity")) {
    const json& c = model["cavity"];
    check_keys(c, "model.cavity", {"g", "kappa", "omega"});
    CavityCoupling cav;
    cav.g = require_number(c, "g", "model.cavity");
    cav.kappa = number_or(c, "kappa", 0.0, "model.cavity");
    cav.drive_omega = number_or(c, "omega", 0.0, "model.cavity");
    if (cav.g < 0.0 || cav.kappa < 0.0) {
      throw ConfigError("model.cavity: g and kappa must be >= 0");
    }
    cfg.model.cavity = cav;
  }

  // ---- noise ----
  if (doc.contains("noise")) {
    if (!doc["noise"].is_array()) throw ConfigError("noise: expected an array");
    for (const json& c : doc["noise"]) {
      check_keys(c, "noise[]", {"kind", "rate", "sigma", "tau_c", "collective"});
      if (!c.contains("kind") || !c["kind"].is_string()) {
        throw ConfigError("noise[]: missing kind");
      }
      NoiseChannelSpec spec;
      spec.kind = parse_noise_kind(c["kind"].get<std::string>(), "noise[]");
      spec.rate = number_or(c, "rate", 0.0, "noise[]");
      spec.sigma = number_or(c, "sigma", 0.0, "noise[]");
      spec.tau_c = number_or(c, "tau_c", 0.0, "noise[]");
      spec.collective = bool_or(c, "collective", false, "noise[]");
      spec.validate();
      cfg.noise.push_back(spec);
    }
  }

  // ---- initial state ----
  double theta0 = M_PI, phi0 = 0.0;
  std::vector<double> theta_list, phi_list;
  std::complex<double> alpha0{0.0, 0.0};
  if (doc.contains("initial")) {
    const json& ini = doc["initial"];
    check_keys(ini, "initial", {"theta", "phi", "theta_list", "phi_list", "alpha0"});
    theta0 = number_or(ini, "theta", M_PI, "initial");
    phi0 = number_or(ini, "phi", 0.0, "initial");
    if (ini.contains("theta_list")) {
      if (!ini["theta_list"].is_array() || ini["theta_list"].size() != cfg.model.n) {
        throw ConfigError("initial: theta_list must have length n");
      }
      for (const json& v : ini["theta_list"]) theta_list.push_back(v.get<double>());
    }
    if (ini.contains("phi_list")) {
      if (!ini["phi_list"].is_array() || ini["phi_list"].size() != cfg.model.n) {
        throw ConfigError("initial: phi_list must have length n");
      }
      for (const json& v : ini["phi_list"]) phi_list.push_back(v.get<double>());
    }
    if (ini.contains("alpha0")) alpha0 = parse_complex(ini["alpha0"], "initial.alpha0");
  }
  if (!std::isfinite(theta0) || !std::isfinite(phi0)) {
    throw ConfigError("initial: angles must be finite");
  }
  cfg.initial = ProductStateSpec::uniform(theta0, phi0, cfg.model.n);
  if (!theta_list.empty()) cfg.initial.theta = theta_list;
  if (!phi_list.empty()) cfg.initial.phi = phi_list;
  for (double v : cfg.initial.theta) {
    if (!std::isfinite(v)) throw ConfigError("initial: angles must be finite");
  }
  for (double v : cfg.initial.phi) {
    if (!std::isfinite(v)) throw ConfigError("initial: angles must be finite");
  }
  if (cfg.model.cavity) {
    cfg.initial.cavity_alpha0 = alpha0;
    cfg.model.cavity->alpha0 = alpha0;
  }

  // ---- run ----
  if (!doc.contains("run")) throw ConfigError("scenario: missing run block");
  const json& run = doc["run"];
  check_keys(run, "run",
             {"t_end", "dt", "output_stride", "trajectories", "seed", "steady_state_window",
              "allow_failures", "oracle"});
  cfg.t_end = require_number(run, "t_end", "run");
  if (cfg.t_end <= 0.0) throw ConfigError("run: t_end must be > 0");
  cfg.dt = number_or(run, "dt", 0.0, "run");
  if (cfg.dt < 0.0) throw ConfigError("run: dt must be >= 0");
  if (run.contains("output_stride")) {
    if (!run["output_stride"].is_number_integer() || run["output_stride"].get<int>() < 1) {
      throw ConfigError("run: output_stride must be a positive integer");
    }
    cfg.output_stride = run["output_stride"].get<int>();
  }
  if (run.contains("trajectories")) {
    if (!run["trajectories"].is_number_integer() || run["trajectories"].get<long long>() < 1) {
      throw ConfigError("run: trajectories must be a positive integer");
    }
    cfg.trajectories = run["trajectories"].get<std::size_t>();
  }
  if (run.contains("seed")) {
    if (!run["seed"].is_number_integer()) throw ConfigError("run: seed must be an integer");
    cfg.seed = run["seed"].get<std::uint64_t>();
  }
  cfg.steady_state_window = number_or(run, "steady_state_window", 0.25, "run");
  if (cfg.steady_state_window <= 0.0 || cfg.steady_state_window > 1.0) {
    throw ConfigError("run: steady_state_window must be in (0, 1]");
  }
  cfg.allow_failures = bool_or(run, "allow_failures", false, "run");
  if (run.contains("oracle")) {
    const json& orc = run["oracle"];
    check_keys(orc, "run.oracle", {"n_ph", "dt", "cutoff_tolerance", "dim_cap"});
    if (orc.contains("n_ph")) {
      if (!orc["n_ph"].is_number_integer() || orc["n_ph"].get<int>() < 0) {
        throw ConfigError("run.oracle: n_ph must be a nonnegative integer");
      }
      cfg.oracle.n_ph = orc["n_ph"].get<int>();
    }
    cfg.oracle.dt = number_or(orc, "dt", 0.0, "run.oracle");
    cfg.oracle.cutoff_tolerance =
        number_or(orc, "cutoff_tolerance", 1e-6, "run.oracle");
    if (orc.contains("dim_cap")) {
      if (!orc["dim_cap"].is_number_integer() || orc["dim_cap"].get<long long>() < 2) {
        throw ConfigError("run.oracle: dim_cap must be an integer >= 2");
      }
      cfg.oracle.dim_cap = orc["dim_cap"].get<std::size_t>();
    }
  }

  // ---- observables ----
  cfg.request.photon = cfg.model.cavity.has_value();
  if (doc.contains("observables")) {
    const json& obs = doc["observables"];
    check_keys(obs, "observables",
               {"collective_means", "collective_variances", "squeezing", "photon", "spin_length",
                "second_moments", "site_means", "pairs", "g2_floor", "squeezing_epsilon"});
    cfg.request.collective_means =
        bool_or(obs, "collective_means", true, "observables");
    cfg.request.collective_variances =
        bool_or(obs, "collective_variances", false, "observables");
    cfg.request.squeezing = bool_or(obs, "squeezing", false, "observables");
    cfg.request.photon =
        bool_or(obs, "photon", cfg.model.cavity.has_value(), "observables");
    cfg.request.spin_length = bool_or(obs, "spin_length", true, "observables");
    cfg.request.second_moments = bool_or(obs, "second_moments", false, "observables");
    if (obs.contains("site_means")) {
      for (const json& v : obs["site_means"]) {
        const int site = v.get<int>();
        if (site < 0 || static_cast<std::size_t>(site) >= cfg.model.n) {
          throw ConfigError("observables: site_means index out of range");
        }
        cfg.request.site_means.push_back(site);
      }
    }
    if (obs.contains("pairs")) {
      for (const json& v : obs["pairs"]) {
        if (!v.is_array() || v.size() != 3 || !v[2].is_string() ||
            v[2].get<std::string>().size() != 2) {
          throw ConfigError("observables: pairs entries must be [i, j, \"ab\"]");
        }
        ObservableRequest::PairCorrelation pc;
        pc.i = v[0].get<int>();
        pc.j = v[1].get<int>();
        const std::string ab = v[2].get<std::string>();
        pc.axis_a = ab[0];
        pc.axis_b = ab[1];
        if (std::string("xyz").find(pc.axis_a) == std::string::npos ||
            std::string("xyz").find(pc.axis_b) == std::string::npos) {
          throw ConfigError("observables: pair axes must be x, y or z");
        }
        if (pc.i < 0 || pc.j < 0 || static_cast<std::size_t>(pc.i) >= cfg.model.n ||
            static_cast<std::size_t>(pc.j) >= cfg.model.n) {
          throw ConfigError("observables: pair index out of range");
        }
        cfg.request.pairs.push_back(pc);
      }
    }
    cfg.request.g2_floor = number_or(obs, "g2_floor", 1e-4, "observables");
    cfg.request.squeezing_epsilon_per_spin =
        number_or(obs, "squeezing_epsilon", 1e-6, "observables");
  }
  if (cfg.request.photon && !cfg.model.cavity) {
    throw ConfigError("observables: photon estimators require a cavity");
  }

  cfg.model.finalize();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& err) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + err.what());
  }
  return parse(doc);
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

nlohmann::json ScenarioConfig::resolved() const {
  json doc;
  doc["schema"] = kScenarioSchema;

  json model;
  model["n"] = this->model.n;
  if (this->model.lattice) {
    model["lattice"] = {{"dims", this->model.lattice->dims},
                        {"spacing", this->model.lattice->spacing}};
  }
  json couplings = json::array();
  for (const auto& c : this->model.couplings) {
    json jc;
    jc["axis"] = to_string(c.axis);
    if (c.all_to_all) {
      jc["J"] = c.uniform_strength * static_cast<double>(this->model.n);
      jc["alpha"] = 0.0;
      jc["normalize_by_n"] = true;
      jc["cutoff_ratio"] = 0.0;
    } else {
      json pairs = json::array();
      for (std::size_t k = 0; k < c.pair_count(); ++k) {
        pairs.push_back({c.pair_i[k], c.pair_j[k], c.pair_val[k]});
      }
      jc["pairs"] = pairs;
    }
    couplings.push_back(jc);
  }
  model["couplings"] = couplings;
  {
    json f;
    const auto& u = this->model.fields.uniform;
    if (u[1] != 0.0) {
      f["omega"] = u[1];
      f["axis"] = "y";
    } else if (u[2] != 0.0) {
      f["omega"] = u[2];
      f["axis"] = "z";
    } else {
      f["omega"] = u[0];
      f["axis"] = "x";
    }
    if (!this->model.fields.detuning_z.empty()) f["detuning"] = this->model.fields.detuning_z;
    model["fields"] = f;
  }
  model["disorder"] = {{"sigma2", this->model.disorder.sigma2},
                       {"frozen", this->model.disorder.frozen}};
  if (this->model.cavity) {
    model["cavity"] = {{"g", this->model.cavity->g},
                       {"kappa", this->model.cavity->kappa},
                       {"omega", this->model.cavity->drive_omega}};
  }
  doc["model"] = model;

  json noise = json::array();
  for (const auto& c : this->noise) {
    json jc;
    jc["kind"] = to_string(c.kind);
    jc["rate"] = c.rate;
    if (c.kind == NoiseKind::dephasing_colored) {
      jc["sigma"] = c.sigma;
      jc["tau_c"] = c.tau_c;
      jc["collective"] = c.collective;
    }
    noise.push_back(jc);
  }
  doc["noise"] = noise;

  {
    json ini;
    bool uniform = true;
    for (std::size_t i = 1; i < initial.theta.size() && uniform; ++i) {
      uniform = initial.theta[i] == initial.theta[0] && initial.phi[i] == initial.phi[0];
    }
    if (uniform) {
      ini["theta"] = initial.theta[0];
      ini["phi"] = initial.phi[0];
    } else {
      ini["theta_list"] = initial.theta;
      ini["phi_list"] = initial.phi;
    }
    if (initial.cavity_alpha0) {
      ini["alpha0"] = {initial.cavity_alpha0->real(), initial.cavity_alpha0->imag()};
    }
    doc["initial"] = ini;
  }

  doc["run"] = {{"t_end", t_end},
                {"dt", dt},
                {"output_stride", output_stride},
                {"trajectories", trajectories},
                {"seed", seed},
                {"steady_state_window", steady_state_window},
                {"allow_failures", allow_failures},
                {"oracle",
                 {{"n_ph", oracle.n_ph},
                  {"dt", oracle.dt},
                  {"cutoff_tolerance", oracle.cutoff_tolerance},
                  {"dim_cap", oracle.dim_cap}}}};

  json obs;
  obs["collective_means"] = request.collective_means;
  obs["collective_variances"] = request.collective_variances;
  obs["squeezing"] = request.squeezing;
  obs["photon"] = request.photon;
  obs["spin_length"] = request.spin_length;
  obs["second_moments"] = request.second_moments;
  if (!request.site_means.empty()) obs["site_means"] = request.site_means;
  if (!request.pairs.empty()) {
    json pairs = json::array();
    for (const auto& p : request.pairs) {
      pairs.push_back({p.i, p.j, std::string() + p.axis_a + p.axis_b});
    }
    obs["pairs"] = pairs;
  }
  obs["g2_floor"] = request.g2_floor;
  obs["squeezing_epsilon"] = request.squeezing_epsilon_per_spin;
  doc["observables"] = obs;
  return doc;
}

nlohmann::json ScenarioConfig::apply_override(const nlohmann::json& doc, const std::string& key,
                                              const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // plain string
  }

  json out = doc;
  json* node = &out;
  std::istringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("override: empty key");
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    const std::string& p = parts[k];
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (...) {
        throw ConfigError("override: '" + p + "' is not an array index in " + key);
      }
      if (idx >= node->size()) throw ConfigError("override: index out of range in " + key);
      node = &(*node)[idx];
    } else {
      if (!node->contains(p)) (*node)[p] = json::object();
      node = &(*node)[p];
    }
  }
  const std::string& last = parts.back();
  if (node->is_array()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(last);
    } catch (...) {
      throw ConfigError("override: '" + last + "' is not an array index in " + key);
    }
    if (idx >= node->size()) throw ConfigError("override: index out of range in " + key);
    (*node)[idx] = parsed;
  } else {
    (*node)[last] = parsed;
  }
  return out;
}

double ScenarioConfig::resolve_dt() const {
  if (dt > 0.0) return dt;
  const ChannelRuntime rt =
      ChannelRuntime::build(noise, model.cavity.has_value(), model.cavity ? model.cavity->kappa : 0.0);
  const double rate = std::max(model.typical_rate(), rt.max_rate());
  if (rate <= 0.0) return t_end / 100.0;
  return 0.01 / rate;
}

}  // namespace ddtwa

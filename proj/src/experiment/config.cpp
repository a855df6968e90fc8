#include "radwave/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "radwave/energy_ledger.hpp"
#include "radwave/errors.hpp"
#include "radwave/scattering.hpp"

namespace radwave::experiment {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string indexed(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

// Reads one JSON object, remembering which keys were consumed so that leftovers are reported.
class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const Json& child(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key) + ": required");
    return as_number(node_.at(key), join(path_, key));
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key) + ": expected a string");
    return v.get<std::string>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError(join(path_, key) + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const Json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key) + ": expected an array of numbers");
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], indexed(join(path_, key), k)));
    return out;
  }

  const Json& array(const std::string& key) {
    static const Json empty = Json::array();
    if (!has(key)) return empty;
    const Json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key) + ": expected an array");
    return v;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()) + ": unknown key");
    }
  }

  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const std::string& path() const { return path_; }

 private:
  static double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    return x;
  }

  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void rethrow_as_config(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const ProbeError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

ShapeSpec parse_shape(const Json& node, const std::string& path) {
  Section s(node, path);
  const std::string kind_name = s.text("kind", "");
  if (kind_name.empty()) throw ConfigError(join(path, "kind") + ": required");
  ProfileKind kind{};
  rethrow_as_config(join(path, "kind"), [&] { kind = profile_kind_from_string(kind_name); });
  ShapeSpec shape;
  rethrow_as_config(path, [&] {
    switch (kind) {
      case ProfileKind::zero:
        shape = ShapeSpec::zero();
        break;
      case ProfileKind::gaussian_bump:
        shape = ShapeSpec::gaussian(s.number("amplitude"), s.number("center"), s.number("width"));
        break;
      case ProfileKind::polynomial_bump:
        shape = ShapeSpec::polynomial(s.number("amplitude"), s.number("center"), s.number("width"));
        break;
      case ProfileKind::power_tail:
        shape = ShapeSpec::power_tail(s.number("amplitude"), s.number("width"), s.number("tail_exponent"),
                                      s.number("r_trunc"));
        break;
      case ProfileKind::custom_samples:
        shape = ShapeSpec::custom(s.numbers("samples"), s.number("spacing"));
        break;
    }
    shape.check();
  });
  s.finish();
  return shape;
}

Polygon parse_region(const Json& node, const std::string& path, std::string& type) {
  Section s(node, path);
  type = s.text("type", "");
  if (type == "rectangle") {
    const Polygon p = Polygon::rectangle(s.number("r1"), s.number("r2"), s.number("t1"), s.number("t2"));
    s.finish();
    return p;
  }
  if (type == "triangle") {
    const Polygon p = Polygon::triangle(s.number("t0"), s.number("r0"));
    s.finish();
    return p;
  }
  if (type == "parallelogram") {
    const Polygon p = Polygon::parallelogram(s.number("t0"), s.number("s"), s.number("s_prime"));
    s.finish();
    return p;
  }
  if (type == "trapezoid") {
    const Polygon p = Polygon::trapezoid(s.number("t1"), s.number("t2"), s.number("s"));
    s.finish();
    return p;
  }
  throw ConfigError(join(path, "type") + ": expected rectangle, triangle, parallelogram or trapezoid");
}

void require_lattice(const GridSpec& grid, double x, const std::string& where) {
  if (!grid.on_lattice(x)) throw ConfigError(where + ": " + std::to_string(x) + " is not a multiple of grid.dr");
}

void require_time(const GridSpec& grid, double t, const std::string& where) {
  require_lattice(grid, t, where);
  if (t < 0.0 || t > grid.t_end + 1e-12) throw ConfigError(where + ": must lie in [0, grid.t_end]");
}

}  // namespace

double scattering_horizon(const ScenarioConfig& config) {
  return config.scattering.horizon > 0.0 ? config.scattering.horizon : config.grid.t_end;
}

std::vector<double> exterior_times(const ScenarioConfig& config) {
  if (!config.scattering.exterior_times.empty()) return config.scattering.exterior_times;
  const double H = scattering_horizon(config);
  const double dr = config.grid.dr;
  std::vector<double> out;
  for (double f : {0.25, 0.5, 1.0}) {
    const double t = std::floor(f * H / dr + 1e-9) * dr;
    if (t > 0.0 && (out.empty() || t > out.back())) out.push_back(t);
  }
  return out;
}

ScenarioConfig parse_config(const Json& doc) {
  ScenarioConfig cfg;
  cfg.source = doc;
  Section root(doc, "");
  cfg.name = root.text("name", "scenario");

  if (!root.has("params")) throw ConfigError("params: required");
  {
    Section s(root.child("params"), "params");
    cfg.params.p = s.number("p", 3.0);
    cfg.params.linear = s.boolean("linear", false);
    s.finish();
    rethrow_as_config("params.p", [&] { validate(cfg.params); });
  }

  if (!root.has("grid")) throw ConfigError("grid: required");
  {
    Section s(root.child("grid"), "grid");
    const double dr = s.number("dr");
    const double r_max = s.number("r_max");
    const double t_end = s.number("t_end");
    s.finish();
    try {
      cfg.grid = make_grid(dr, r_max, t_end);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()));
    }
  }

  if (!root.has("profile")) throw ConfigError("profile: required");
  {
    Section s(root.child("profile"), "profile");
    cfg.profile.u0 = s.has("u0") ? parse_shape(s.child("u0"), "profile.u0") : ShapeSpec::zero();
    cfg.profile.u1 = s.has("u1") ? parse_shape(s.child("u1"), "profile.u1") : ShapeSpec::zero();
    s.finish();
    const double support = cfg.profile.support_radius();
    const double room = cfg.grid.r_max - cfg.grid.t_end;
    if (support > room + 1e-12) {
      throw ConfigError("profile: support radius " + std::to_string(support) + " exceeds grid.r_max - grid.t_end = " +
                        std::to_string(room));
    }
  }

  const CriticalExponents crit = cfg.params.linear ? CriticalExponents{0.0, 1.0, 0.0} : critical_exponents(cfg.params);

  if (root.has("probes")) {
    Section s(root.child("probes"), "probes");
    const Json& traces = s.array("traces");
    for (std::size_t k = 0; k < traces.size(); ++k) {
      const std::string path = indexed("probes.traces", k);
      Section t(traces[k], path);
      TraceRequest req;
      const std::string kind = t.text("kind", "outgoing");
      if (kind == "outgoing") {
        req.kind = TraceKind::outgoing;
      } else if (kind == "incoming") {
        req.kind = TraceKind::incoming;
      } else {
        throw ConfigError(join(path, "kind") + ": expected outgoing or incoming");
      }
      req.label = t.number("label");
      t.finish();
      require_lattice(cfg.grid, req.label, join(path, "label"));
      cfg.traces.push_back(req);
    }
    const Json& annulus = s.array("annulus");
    for (std::size_t k = 0; k < annulus.size(); ++k) {
      const std::string path = indexed("probes.annulus", k);
      Section a(annulus[k], path);
      AnnulusProbe probe{a.number("c"), a.number("beta")};
      a.finish();
      if (!(probe.c > 0.0 && probe.c < 1.0)) throw ConfigError(join(path, "c") + ": must lie in (0, 1)");
      if (!(probe.beta > 0.0 && probe.beta < crit.beta0)) {
        throw ConfigError(join(path, "beta") + ": must lie in (0, beta0) with beta0 = " + std::to_string(crit.beta0));
      }
      cfg.annulus.push_back(probe);
    }
    cfg.morawetz_radii = s.numbers("morawetz_radii");
    for (std::size_t k = 0; k < cfg.morawetz_radii.size(); ++k) {
      const double R = cfg.morawetz_radii[k];
      const std::string path = indexed("probes.morawetz_radii", k);
      require_lattice(cfg.grid, R, path);
      if (!(R > 0.0 && R < cfg.grid.r_max)) throw ConfigError(path + ": must lie in (0, grid.r_max)");
    }
    const Json& t2 = s.array("theorem2");
    for (std::size_t k = 0; k < t2.size(); ++k) {
      const std::string path = indexed("probes.theorem2", k);
      Section a(t2[k], path);
      Theorem2Probe probe{a.number("R"), a.number("beta"), a.number("kappa")};
      a.finish();
      rethrow_as_config(path, [&] { validate_theorem2_exponents(probe.beta, probe.kappa, cfg.params); });
      require_lattice(cfg.grid, probe.R, join(path, "R"));
      if (!(probe.R > 0.0 && probe.R < cfg.grid.r_max)) throw ConfigError(join(path, "R") + ": must lie in (0, grid.r_max)");
      if (probe.R + std::pow(probe.R, probe.beta) > cfg.grid.t_end + 1e-12) {
        throw ConfigError(join(path, "R") + ": needs grid.t_end >= R + R^beta = " +
                          std::to_string(probe.R + std::pow(probe.R, probe.beta)));
      }
      cfg.theorem2.push_back(probe);
    }
    const Json& regions = s.array("regions");
    for (std::size_t k = 0; k < regions.size(); ++k) {
      const std::string path = indexed("probes.regions", k);
      RegionSpec spec;
      rethrow_as_config(path, [&] {
        spec.polygon = parse_region(regions[k], path, spec.type);
        validate_region(spec.polygon, cfg.grid);
      });
      cfg.regions.push_back(spec);
    }
    s.finish();
  }

  if (root.has("scattering")) {
    Section s(root.child("scattering"), "scattering");
    auto& sc = cfg.scattering;
    sc.horizon = s.number("horizon", 0.0);
    sc.decay_lo = s.number("decay_lo", sc.decay_lo);
    sc.decay_hi = s.number("decay_hi", sc.decay_hi);
    sc.exterior_label = s.number("exterior_label", 0.0);
    sc.exterior_times = s.numbers("exterior_times");
    sc.appendix_windows = s.count("appendix_windows", sc.appendix_windows);
    const std::size_t seed = s.count("appendix_seed", sc.appendix_seed);
    if (seed > 0xffffffffULL) throw ConfigError("scattering.appendix_seed: must fit in 32 bits");
    sc.appendix_seed = static_cast<std::uint32_t>(seed);
    if (s.has("min_scattered_ratio")) sc.min_scattered_ratio = s.number("min_scattered_ratio");
    s.finish();
    if (sc.horizon != 0.0) require_time(cfg.grid, sc.horizon, "scattering.horizon");
    if (!(sc.decay_lo > 0.0 && sc.decay_hi > sc.decay_lo)) {
      throw ConfigError("scattering.decay_lo: need 0 < decay_lo < decay_hi");
    }
    require_lattice(cfg.grid, sc.exterior_label, "scattering.exterior_label");
    for (std::size_t k = 0; k < sc.exterior_times.size(); ++k) {
      require_time(cfg.grid, sc.exterior_times[k], indexed("scattering.exterior_times", k));
    }
  }

  if (root.has("output")) {
    Section s(root.child("output"), "output");
    cfg.output.directory = s.text("directory", cfg.output.directory);
    cfg.output.stride = s.count("stride", 0);
    if (s.has("formats")) {
      const Json& f = s.array("formats");
      cfg.output.csv = cfg.output.json = false;
      for (std::size_t k = 0; k < f.size(); ++k) {
        const std::string where = indexed("output.formats", k);
        if (!f[k].is_string()) throw ConfigError(where + ": expected \"csv\" or \"json\"");
        const std::string name = f[k].get<std::string>();
        if (name == "csv") {
          cfg.output.csv = true;
        } else if (name == "json") {
          cfg.output.json = true;
        } else {
          throw ConfigError(where + ": expected \"csv\" or \"json\"");
        }
      }
    }
    s.finish();
  }

  if (root.has("convergence")) {
    Section s(root.child("convergence"), "convergence");
    auto& cv = cfg.convergence;
    cv.levels = s.numbers("levels");
    cv.reference_dr = s.number("reference_dr", 0.0);
    cv.checkpoints = s.numbers("checkpoints");
    cv.min_order = s.number("min_order", cv.min_order);
    s.finish();
    if (cv.levels.size() < 3) throw ConfigError("convergence.levels: a study needs at least 3 levels");
    for (std::size_t k = 0; k < cv.levels.size(); ++k) {
      if (!(cv.levels[k] > 0.0)) throw ConfigError(indexed("convergence.levels", k) + ": must be positive");
      if (k > 0 && std::abs(2.0 * cv.levels[k] - cv.levels[k - 1]) > 1e-12 * cv.levels[k - 1]) {
        throw ConfigError(indexed("convergence.levels", k) + ": levels must halve dr at each step");
      }
    }
    const GridSpec coarse = [&] {
      try {
        return make_grid(cv.levels.front(), cfg.grid.r_max, cfg.grid.t_end);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("convergence.levels[0]: ") + e.what());
      }
    }();
    for (std::size_t k = 0; k < cv.checkpoints.size(); ++k) {
      require_time(coarse, cv.checkpoints[k], indexed("convergence.checkpoints", k));
    }
  }

  root.finish();
  return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace radwave::experiment

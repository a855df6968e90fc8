#include "radwave/experiment/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "radwave/energy_ledger.hpp"
#include "radwave/errors.hpp"
#include "radwave/evolve.hpp"
#include "radwave/parallel.hpp"
#include "radwave/scattering.hpp"

namespace radwave::experiment {

namespace {

using CsvFiles = std::vector<std::pair<std::string, std::string>>;

std::filesystem::path output_dir(const ScenarioConfig& cfg, const CommandOptions& opt) {
  return opt.out_dir ? std::filesystem::path(*opt.out_dir) : std::filesystem::path(cfg.output.directory);
}

CommandOutcome finish(CommandReport report, const ScenarioConfig& cfg, const CommandOptions& opt, const CsvFiles& csvs) {
  CommandOutcome out;
  const auto dir = output_dir(cfg, opt);
  if (cfg.output.csv) {
    for (const auto& [name, text] : csvs) {
      write_atomic(dir / name, text);
      out.files.push_back(dir / name);
    }
  }
  if (cfg.output.json) {
    std::string file = report.command + ".json";
    std::replace(file.begin(), file.end(), '-', '_');
    write_atomic(dir / file, assemble_report(report, cfg, opt.metadata).dump(2) + "\n");
    out.files.push_back(dir / file);
  }
  out.exit_code = report.all_passed() ? 0 : 2;
  out.report = std::move(report);
  return out;
}

double energy_scale(double E) { return E > 0.0 ? E : 1.0; }

double lattice_floor(double x, double dr) { return std::floor(x / dr + 1e-9) * dr; }

std::string family_name(FluxFamily f) { return to_string(f); }

Json polygon_json(const Polygon& p) {
  Json v = Json::array();
  for (const auto& [r, t] : p.vertices) v.push_back(Json::array({r, t}));
  return v;
}

double polygon_top(const Polygon& p) {
  double top = 0.0;
  for (const auto& v : p.vertices) top = std::max(top, v.second);
  return top;
}

std::vector<RegionSpec> default_regions(const ScenarioConfig& cfg, double coarse_dr) {
  const double unit = 4.0 * coarse_dr;
  const double L = std::floor(std::min(cfg.grid.t_end, cfg.grid.r_max) / 2.0 / unit + 1e-9) * unit;
  if (!(L > 0.0)) throw ConfigError("probes.regions: grid too small for the default region suite");
  return {
      {"triangle", Polygon::triangle(0.0, L)},
      {"rectangle", Polygon::rectangle(0.25 * L, 0.75 * L, 0.25 * L, 0.75 * L)},
      {"parallelogram", Polygon::parallelogram(0.0, 0.5 * L, L)},
      {"trapezoid", Polygon::trapezoid(0.0, 0.5 * L, L)},
  };
}

void add_series(Json& results, const Trajectory& tr, std::size_t stride) {
  Json t = Json::array(), e = Json::array(), em = Json::array(), ep = Json::array();
  for (std::size_t n = 0; n < tr.steps.size(); ++n) {
    if (n % stride != 0 && n + 1 != tr.steps.size()) continue;
    t.push_back(tr.steps[n].t);
    e.push_back(tr.steps[n].energy);
    em.push_back(tr.steps[n].e_minus);
    ep.push_back(tr.steps[n].e_plus);
  }
  results["series"] = Json{{"t", t}, {"energy", e}, {"e_minus", em}, {"e_plus", ep}};
}

std::string origin_csv(const Trajectory& tr) {
  CsvTable csv({"t", "u0_est", "u0_est_richardson"});
  for (const auto& d : tr.steps) csv.add_row({d.t, d.u0_est, d.u0_richardson});
  return csv.str();
}

std::string energy_csv(const Trajectory& tr) {
  CsvTable csv({"t", "energy", "e_minus", "e_plus"});
  for (const auto& d : tr.steps) csv.add_row({d.t, d.energy, d.e_minus, d.e_plus});
  return csv.str();
}

std::string snapshots_csv(const Trajectory& tr) {
  CsvTable csv({"t", "r", "w", "phi", "psi"});
  auto emit = [&](const FieldState& s) {
    for (std::size_t i = 0; i < s.size(); ++i) csv.add_row({s.t, s.radius(i), s.w[i], s.phi[i], s.psi[i]});
  };
  if (tr.snapshots.empty() || tr.snapshots.front().t != tr.initial.t) emit(tr.initial);
  for (const auto& s : tr.snapshots) emit(s);
  return csv.str();
}

std::string g_csv(const RadiationProfile& g) {
  CsvTable csv({"label", "g", "error_estimate"});
  for (const auto& s : g.samples) csv.add_row({s.label, s.value, s.error_estimate});
  return csv.str();
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "verify-flux", "verify-morawetz", "scattering",
                                                 "convergence"};
  return names;
}

CommandOutcome cmd_simulate(const ScenarioConfig& cfg, const CommandOptions& opt) {
  ProbeSet probes;
  probes.snapshot_stride = cfg.output.stride;
  probes.traces = cfg.traces;
  const Trajectory tr = run(init_state(cfg.profile, cfg.grid), cfg.grid, cfg.params, probes);

  CommandReport rep;
  rep.command = "simulate";
  const double E = tr.steps.front().energy;
  const double scale = energy_scale(E);
  double drift = 0.0, partition = 0.0, em_up = 0.0, ep_down = 0.0;
  for (std::size_t n = 0; n < tr.steps.size(); ++n) {
    const auto& d = tr.steps[n];
    drift = std::max(drift, std::abs(d.energy - E) / scale);
    partition = std::max(partition, std::abs(d.e_minus + d.e_plus - d.energy) / scale);
    if (n > 0) {
      em_up = std::max(em_up, (d.e_minus - tr.steps[n - 1].e_minus) / scale);
      ep_down = std::max(ep_down, (tr.steps[n - 1].e_plus - d.e_plus) / scale);
    }
  }
  Json& res = rep.results;
  res["energy"] = E;
  res["final_time"] = tr.steps.back().t;
  res["max_relative_drift"] = drift;
  res["partition_error"] = partition;
  res["e_minus_max_increase"] = em_up;
  res["e_plus_max_decrease"] = ep_down;
  res["e_minus_final_ratio"] = tr.steps.back().e_minus / scale;
  const std::size_t stride =
      cfg.output.stride > 0 ? cfg.output.stride : std::max<std::size_t>(1, tr.steps.size() / 200);
  add_series(res, tr, stride);
  Json traces = Json::array();
  for (const auto& t : tr.traces) {
    Json j;
    j["kind"] = t.kind == TraceKind::outgoing ? "outgoing" : "incoming";
    j["label"] = t.label;
    j["samples"] = t.samples.size();
    j["final_invariant"] = t.samples.empty() ? 0.0 : t.invariant(t.samples.size() - 1);
    traces.push_back(j);
  }
  res["traces"] = traces;

  rep.verdicts.push_back(verdict_le("energy_drift", drift, 1e-3));
  rep.verdicts.push_back(verdict_le("partition_exact", partition, 1e-12));
  rep.verdicts.push_back(verdict_le("e_minus_nonincreasing", em_up, 1e-3));
  rep.verdicts.push_back(verdict_le("e_plus_nondecreasing", ep_down, 1e-3));
  if (E > 0.0) {
    const BoundReport b = pointwise_bound_report(tr.final_state, E, cfg.params);
    res["pointwise_energy_ratio"] = b.energy_ratio_max;
    res["pointwise_lemma_ratio"] = b.lemma_ratio_max;
    rep.verdicts.push_back(verdict_le("pointwise_energy_bound", b.energy_ratio_max, 1.0 + b.tolerance));
    if (!cfg.params.linear) {
      rep.verdicts.push_back(verdict_le("pointwise_lemma_bound", b.lemma_ratio_max, 1.0 + b.tolerance));
    }
  }
  return finish(std::move(rep), cfg, opt,
                {{"snapshots.csv", snapshots_csv(tr)}, {"origin.csv", origin_csv(tr)}, {"energy.csv", energy_csv(tr)}});
}

CommandOutcome cmd_verify_flux(const ScenarioConfig& cfg, const CommandOptions& opt) {
  const std::vector<double> levels = {4.0 * cfg.grid.dr, 2.0 * cfg.grid.dr, cfg.grid.dr};
  std::vector<RegionSpec> regions = cfg.regions.empty() ? default_regions(cfg, levels.front()) : cfg.regions;
  double top = 0.0;
  for (const auto& r : regions) top = std::max(top, polygon_top(r.polygon));
  std::vector<GridSpec> grids;
  for (double dr : levels) {
    try {
      grids.push_back(make_grid(dr, cfg.grid.r_max, top));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("grid.dr: the flux study runs at 4 dr, 2 dr and dr: ") + e.what());
    }
  }
  for (std::size_t k = 0; k < regions.size(); ++k) {
    try {
      validate_region(regions[k].polygon, grids.front());
    } catch (const ProbeError& e) {
      throw ConfigError("probes.regions[" + std::to_string(k) + "]: must sit on the 4 dr lattice: " + e.what());
    }
  }
  ProbeSet probes;
  for (const auto& r : regions) probes.add_region(r.polygon);
  std::vector<Trajectory> runs(levels.size());
  parallel_for(levels.size(), opt.threads, [&](std::size_t k) {
    runs[k] = run(init_state(cfg.profile, grids[k]), grids[k], cfg.params, probes);
  });

  CommandReport rep;
  rep.command = "verify-flux";
  const double E = runs.back().steps.front().energy;
  const double scale = energy_scale(E);
  const double noise = 1e-10 * scale;
  rep.results["energy"] = E;
  rep.results["levels"] = levels;
  Json rows = Json::array();
  CsvTable csv({"region", "family", "dr", "line_sum", "area_term", "residual"});
  for (std::size_t k = 0; k < regions.size(); ++k) {
    for (FluxFamily fam : {FluxFamily::inward, FluxFamily::outward}) {
      std::vector<FluxResidual> res;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        res.push_back(flux_identity_residual(runs[l], regions[k].polygon, fam, cfg.params));
        csv.add_row({static_cast<double>(k), fam == FluxFamily::inward ? 0.0 : 1.0, levels[l], res.back().line_sum,
                     res.back().area_term, res.back().residual});
      }
      Json residuals = Json::array();
      for (const auto& r : res) residuals.push_back(r.residual);
      double order = std::numeric_limits<double>::infinity();
      for (std::size_t l = 1; l < res.size(); ++l) order = std::min(order, std::log2(res[l - 1].residual / res[l].residual));
      const bool below_noise = res.back().residual <= noise;
      Json row;
      row["region"] = k;
      row["type"] = regions[k].type;
      row["vertices"] = polygon_json(regions[k].polygon);
      row["family"] = family_name(fam);
      row["residuals"] = residuals;
      row["line_sum"] = res.back().line_sum;
      row["area_term"] = res.back().area_term;
      row["scale"] = res.back().scale;
      row["observed_order"] = below_noise ? Json(nullptr) : Json(order);
      row["below_noise_floor"] = below_noise;
      rows.push_back(row);
      const std::string tag = "region" + std::to_string(k) + "_" + regions[k].type + "_" + family_name(fam);
      rep.verdicts.push_back(verdict_le(tag + "_residual", res.back().residual, 1e-2 * E));
      if (below_noise) {
        rep.verdicts.push_back(verdict_flag(tag + "_order_below_noise_floor", true, res.back().residual));
      } else {
        rep.verdicts.push_back(verdict_ge(tag + "_order", order, 1.8));
      }
    }
    if (regions[k].type == "triangle") {
      const auto& v = regions[k].polygon.vertices;
      double t0 = v.front().second, r0 = 0.0;
      for (const auto& [r, t] : v) {
        t0 = std::min(t0, t);
        r0 = std::max(r0, r);
      }
      const TriangleLawReport tl = triangle_law_report(runs.back(), t0, r0, cfg.params);
      Json j{{"region", k},
             {"e_minus", tl.e_minus},
             {"mu_term", tl.mu_term},
             {"q_minus_minus", tl.q_minus_minus},
             {"double_term", tl.double_term},
             {"residual", tl.residual}};
      rep.results["triangle_laws"].push_back(j);
      rep.verdicts.push_back(verdict_le("region" + std::to_string(k) + "_triangle_law", tl.residual, 1e-2 * E));
    }
  }
  rep.results["rows"] = rows;
  return finish(std::move(rep), cfg, opt, {{"flux.csv", csv.str()}});
}

CommandOutcome cmd_verify_morawetz(const ScenarioConfig& cfg, const CommandOptions& opt) {
  if (cfg.morawetz_radii.empty()) throw ConfigError("probes.morawetz_radii: required for verify-morawetz");
  ProbeSet probes;
  for (double R : cfg.morawetz_radii) probes.add_radius(R);
  const TwoSidedRun two = run_two_sided(init_state(cfg.profile, cfg.grid), cfg.grid, cfg.params, probes, opt.threads);
  const double T = cfg.grid.t_end;
  const double E = two.forward.steps.front().energy;

  CommandReport rep;
  rep.command = "verify-morawetz";
  rep.results["energy"] = E;
  rep.results["T"] = T;
  CsvTable csv({"R", "T", "term1", "term2", "term3", "term4", "sum", "defect", "boundary_difference",
                "identity_residual", "prop_lhs", "prop_rhs", "horizon_truncated"});
  Json rows = Json::array();
  for (double R : cfg.morawetz_radii) {
    const MorawetzReport m = morawetz_report(two, R, T, cfg.params);
    csv.add_row({R, T, m.terms[0], m.terms[1], m.terms[2], m.terms[3], m.sum, m.defect, m.boundary_difference,
                 m.identity_residual, m.prop_lhs, m.prop_rhs, m.horizon_truncated ? 1.0 : 0.0});
    Json row;
    row["R"] = R;
    row["terms"] = Json::array({m.terms[0], m.terms[1], m.terms[2], m.terms[3]});
    row["sum"] = m.sum;
    row["defect"] = m.defect;
    row["boundary_past"] = m.boundary_past;
    row["boundary_future"] = m.boundary_future;
    row["boundary_difference"] = m.boundary_difference;
    row["identity_residual"] = m.identity_residual;
    row["corollary"] = Json::array({m.corollary[0], m.corollary[1], m.corollary[2], m.corollary[3]});
    row["corollary_bounds"] =
        Json::array({m.corollary_bounds[0], m.corollary_bounds[1], m.corollary_bounds[2], m.corollary_bounds[3]});
    row["prop_lhs"] = m.prop_lhs;
    row["prop_rhs"] = m.prop_rhs;
    row["horizon_truncated"] = m.horizon_truncated;
    rows.push_back(row);
    const std::string tag = "R" + format_number(R);
    rep.verdicts.push_back(verdict_le(tag + "_sum_le_energy", m.sum, E * (1.0 + 1e-3)));
    rep.verdicts.push_back(
        verdict_le(tag + "_identity_defect", std::abs(m.defect), std::abs(E - m.boundary_difference) + 1e-2 * E));
    rep.verdicts.push_back(verdict_le(tag + "_prop_raw_inequality", m.prop_lhs, m.prop_rhs));
    static const char* names[4] = {"ball_kinetic", "ball_potential", "dissipation", "sphere_trace"};
    for (int k = 0; k < 4; ++k) {
      rep.verdicts.push_back(verdict_le(tag + "_corollary_" + names[k], m.corollary[k], m.corollary_bounds[k] * (1.0 + 1e-9)));
    }
  }
  rep.results["radii"] = rows;
  const EnergyIdentityReport ei = energy_identity_check(two, T, cfg.params);
  rep.results["energy_identity"] = Json{{"mu_term", ei.mu_term},
                                        {"double_term", ei.double_term},
                                        {"residual", ei.residual},
                                        {"tail_estimate", ei.tail_estimate},
                                        {"horizon_sufficient", ei.horizon_sufficient}};
  rep.verdicts.push_back(verdict_le("energy_identity", ei.residual, ei.tail_estimate + 1e-2 * E));
  return finish(std::move(rep), cfg, opt, {{"morawetz.csv", csv.str()}});
}

CommandOutcome cmd_scattering(const ScenarioConfig& cfg, const CommandOptions& opt) {
  const GridSpec& g = cfg.grid;
  const double H = scattering_horizon(cfg);
  const bool nonlinear = !cfg.params.linear;
  std::vector<double> horizons;
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    const double t = lattice_floor(f * H, g.dr);
    if (t > 0.0 && (horizons.empty() || t > horizons.back())) horizons.push_back(t);
  }
  const std::vector<double> ext_times = exterior_times(cfg);
  ProbeSet probes;
  probes.snapshot_stride = cfg.output.stride;
  for (double t : horizons) probes.add_snapshot(t);
  for (double t : ext_times) probes.add_snapshot(t);
  for (int k = 1; k <= 32; ++k) {
    const double t = lattice_floor(g.t_end * k / 32.0, g.dr);
    if (t > 0.0) probes.add_snapshot(t);
  }
  probes.traces = cfg.traces;
  for (const auto& t2 : cfg.theorem2) probes.add_radius(t2.R);
  probes.label_sums = nonlinear;
  const TwoSidedRun two = run_two_sided(init_state(cfg.profile, g), g, cfg.params, probes, opt.threads);
  const Trajectory& fw = two.forward;
  const Trajectory& bw = two.backward;
  const double E = fw.steps.front().energy;
  const double scale = energy_scale(E);

  CommandReport rep;
  rep.command = "scattering";
  Json& res = rep.results;
  res["energy"] = E;
  res["horizon"] = H;

  const RadiationProfile gp = extract_g(fw, H, cfg.params);
  const RadiationProfile gm = extract_g(bw, H, cfg.params);
  res["scattered_energy_plus"] = gp.scattered_energy;
  res["scattered_energy_minus"] = gm.scattered_energy;
  res["decay_constant"] = gp.decay_constant;
  rep.verdicts.push_back(verdict_le("scattered_energy_plus_le_energy", gp.scattered_energy, E * (1.0 + 1e-6)));
  rep.verdicts.push_back(verdict_le("scattered_energy_minus_le_energy", gm.scattered_energy, E * (1.0 + 1e-6)));

  Json ratios = Json::array();
  double prev = -1.0, worst_drop = 0.0;
  for (double t : horizons) {
    const double ratio = extract_g(fw, t, cfg.params).scattered_energy / scale;
    ratios.push_back(Json{{"horizon", t}, {"ratio", ratio}});
    if (prev >= 0.0) worst_drop = std::max(worst_drop, prev - ratio);
    prev = ratio;
  }
  res["scattered_ratio_by_horizon"] = ratios;
  rep.verdicts.push_back(verdict_le("scattered_ratio_nondecreasing_in_horizon", worst_drop, 1e-12));
  if (cfg.scattering.min_scattered_ratio) {
    rep.verdicts.push_back(
        verdict_ge("scattered_ratio_at_horizon", gp.scattered_energy / scale, *cfg.scattering.min_scattered_ratio));
  }

  if (cfg.params.linear) {
    double err = 0.0, mag = 0.0;
    for (const auto& s : gp.samples) {
      const double r = H - s.label;
      if (r < 0.0 || r > g.r_max) continue;
      const LinearSample ex = dalembert_linear(cfg.profile, r, H);
      const double psi = ex.w_r - ex.w_t;
      err = std::max(err, std::abs(s.value - psi));
      mag = std::max(mag, std::abs(psi));
    }
    const double rel = mag > 0.0 ? err / mag : err;
    res["linear_exact_error"] = rel;
    rep.verdicts.push_back(verdict_le("linear_g_plus_exact_match", rel, 1e-8, "closed-form"));
  }

  Json fits = Json::array();
  for (const auto& t : fw.traces) {
    if (t.kind != TraceKind::outgoing) continue;
    const DecayFit f = decay_fit(t, cfg.scattering.decay_lo, cfg.scattering.decay_hi, cfg.params);
    fits.push_back(Json{{"label", t.label},
                        {"alpha", f.alpha},
                        {"C", f.C},
                        {"points", f.points},
                        {"below_noise_floor", f.below_noise_floor},
                        {"threshold", f.threshold}});
    const std::string tag = "decay_fit_tau" + format_number(t.label);
    if (f.below_noise_floor) {
      rep.verdicts.push_back(verdict_flag(tag + "_below_noise_floor", true));
    } else {
      rep.verdicts.push_back(verdict_ge(tag, f.alpha, f.threshold));
    }
  }
  res["decay_fits"] = fits;

  Json ext = Json::array();
  std::vector<double> ext_values;
  for (double t : ext_times) {
    const ExteriorDifference d = exterior_difference(fw, gp, cfg.scattering.exterior_label, t);
    ext.push_back(Json{{"t", t}, {"value", d.value}, {"r_start", d.r_start}, {"truncated", d.truncated}});
    ext_values.push_back(d.value);
  }
  res["exterior_differences"] = ext;
  if (!ext_values.empty()) {
    const double floor = 1e-12 * scale;
    double worst_rise = -std::numeric_limits<double>::infinity();
    bool all_noise = true;
    for (std::size_t k = 0; k < ext_values.size(); ++k) {
      all_noise = all_noise && ext_values[k] <= floor;
      if (k > 0) worst_rise = std::max(worst_rise, ext_values[k] - ext_values[k - 1]);
    }
    if (all_noise) {
      rep.verdicts.push_back(verdict_flag("exterior_difference_below_noise_floor", true, ext_values.back()));
    } else if (cfg.params.linear) {
      rep.verdicts.push_back(verdict_le("exterior_difference_nonincreasing", ext_values.size() > 1 ? worst_rise : 0.0, floor));
      rep.verdicts.push_back(verdict_le("exterior_difference_final", ext_values.back(), 0.05 * E));
    } else {
      Verdict v{"exterior_difference_strictly_decreasing", ext_values.size() > 1 ? worst_rise : 0.0, 0.0, "<", "measured",
                ext_values.size() < 2 || worst_rise < 0.0};
      rep.verdicts.push_back(v);
      rep.verdicts.push_back(verdict_le("exterior_difference_final", ext_values.back(), 0.05 * E));
    }
  }

  Json annuli = Json::array();
  for (const auto& a : cfg.annulus) {
    for (const Trajectory* tr : {&fw, &bw}) {
      Json j{{"c", a.c}, {"beta", a.beta}, {"direction", tr->reversed ? "past" : "future"}, {"t", H}};
      if (H <= annulus_min_time(a.c, a.beta)) {
        j["below_min_time"] = true;
        annuli.push_back(j);
        continue;
      }
      const AnnulusEnergy an = annulus_energy(tr->snapshot_at(H), a.c, a.beta, cfg.params);
      const EstimatorConsistency ec = estimator_consistency(*tr, H, a.c, a.beta, cfg.params);
      j["below_min_time"] = false;
      j["inner"] = an.inner;
      j["annulus"] = an.annulus;
      j["exterior"] = an.exterior;
      j["retarded_defect"] = ec.defect;
      j["consistency_bar"] = ec.bar;
      annuli.push_back(j);
      rep.verdicts.push_back(verdict_le("estimator_consistency_c" + format_number(a.c) + "_beta" +
                                            format_number(a.beta) + (tr->reversed ? "_past" : "_future"),
                                        std::abs(ec.annulus - ec.defect), ec.bar + 1e-6 * E));
    }
  }
  res["annulus"] = annuli;

  Json ledgers = Json::array();
  for (const auto& p : cfg.theorem2) {
    const Theorem2Ledger L = theorem2_ledger(two, p.R, p.beta, p.kappa, gm.scattered_energy, cfg.params);
    ledgers.push_back(Json{{"R", L.R},
                           {"beta", L.beta},
                           {"kappa", L.kappa},
                           {"I", L.I},
                           {"raw_lhs", L.raw_lhs},
                           {"raw_rhs", L.raw_rhs},
                           {"rhs_upper", L.rhs_upper},
                           {"retarded", L.retarded},
                           {"lhs_lower", L.lhs_lower},
                           {"exponent_gap", L.exponent_gap}});
    const std::string tag = "theorem2_R" + format_number(p.R);
    rep.verdicts.push_back(verdict_le(tag + "_lhs_le_rhs", L.raw_lhs, L.raw_rhs));
    rep.verdicts.push_back(verdict_le(tag + "_rhs_le_upper", L.raw_rhs, L.rhs_upper * (1.0 + 1e-9)));
  }
  res["theorem2"] = ledgers;
  std::vector<double> kappas;
  for (const auto& p : cfg.theorem2) {
    if (std::find(kappas.begin(), kappas.end(), p.kappa) == kappas.end()) kappas.push_back(p.kappa);
  }
  for (double kappa : kappas) {
    const double I0 = weighted_energy(fw.initial, kappa, cfg.params);
    double worst = 0.0;
    for (const Trajectory* tr : {&fw, &bw}) {
      double last = I0;
      for (const auto& s : tr->snapshots) {
        if (s.t == tr->initial.t) continue;
        const double I = weighted_energy(s, kappa, cfg.params);
        worst = std::max(worst, I - last);
        last = I;
      }
    }
    const double rel = I0 > 0.0 ? worst / I0 : worst;
    res["weighted_energy"].push_back(Json{{"kappa", kappa}, {"I0", I0}, {"max_relative_increase", rel}});
    rep.verdicts.push_back(verdict_le("weighted_energy_nonincreasing_kappa" + format_number(kappa), rel, 1e-3));
  }

  if (nonlinear && E > 0.0 && cfg.scattering.appendix_windows > 0) {
    const auto windows = random_windows(cfg.scattering.appendix_windows, 0.0, H, g.dr, cfg.scattering.appendix_seed);
    const AppendixReport ap = appendix_inequalities(fw, gp, windows, cfg.params);
    Json w = Json::array();
    std::size_t failures = 0;
    for (const auto& win : ap.windows) {
      w.push_back(Json{{"tau1", win.tau1}, {"tau2", win.tau2}, {"mu", win.mu}, {"rhs", win.rhs}, {"holds", win.holds}});
      failures += win.holds ? 0 : 1;
    }
    res["appendix"] = Json{{"m_integral", ap.m_integral},
                           {"double_integral", ap.double_integral},
                           {"relative_gap", ap.relative_gap},
                           {"empirical_constant", ap.empirical_constant},
                           {"proof_constant", ap.proof_constant},
                           {"labels_used", ap.labels_used},
                           {"windows", w}};
    rep.verdicts.push_back(verdict_le("appendix_change_of_variables", ap.relative_gap, 1e-6));
    rep.verdicts.push_back(verdict_le("appendix_window_failures", static_cast<double>(failures), 0.0));
    rep.verdicts.push_back(verdict_le("appendix_empirical_constant", ap.empirical_constant, ap.proof_constant));
  }

  return finish(std::move(rep), cfg, opt, {{"g_plus.csv", g_csv(gp)}, {"g_minus.csv", g_csv(gm)}});
}

CommandOutcome cmd_convergence(const ScenarioConfig& cfg, const CommandOptions& opt) {
  if (cfg.convergence.levels.empty()) throw ConfigError("convergence.levels: required for the convergence command");
  ConvergenceSetup setup;
  setup.profile = cfg.profile;
  setup.params = cfg.params;
  setup.r_max = cfg.grid.r_max;
  setup.t_end = cfg.grid.t_end;
  setup.levels = cfg.convergence.levels;
  setup.reference_dr = cfg.convergence.reference_dr;
  setup.checkpoints = cfg.convergence.checkpoints;
  setup.threads = opt.threads;
  const ConvergenceReport cr = convergence_study(setup);

  CommandReport rep;
  rep.command = "convergence";
  Json& res = rep.results;
  res["levels"] = cr.levels;
  res["reference_dr"] = cr.reference_dr;
  res["w_errors"] = cr.w_errors;
  res["drifts"] = cr.drifts;
  res["exact_transport"] = cr.exact_transport;
  CsvTable csv({"dr", "w_error", "drift"});
  for (std::size_t k = 0; k < cr.levels.size(); ++k) csv.add_row({cr.levels[k], cr.w_errors[k], cr.drifts[k]});
  if (cr.exact_transport) {
    const double worst = *std::max_element(cr.w_errors.begin(), cr.w_errors.end());
    res["w_orders"] = Json(nullptr);
    res["drift_orders"] = Json(nullptr);
    rep.verdicts.push_back(verdict_le("exact_transport", worst, 1e-12, "closed-form"));
  } else {
    res["w_orders"] = cr.w_orders;
    res["drift_orders"] = cr.drift_orders;
    rep.verdicts.push_back(verdict_ge("min_w_order", cr.min_w_order(), cfg.convergence.min_order));
    rep.verdicts.push_back(verdict_ge("min_drift_order", cr.min_drift_order(), cfg.convergence.min_order));
  }
  return finish(std::move(rep), cfg, opt, {{"convergence.csv", csv.str()}});
}

int run_command(const std::string& name, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  CommandOutcome outcome;
  try {
    if (name == "simulate") {
      outcome = cmd_simulate(cfg, options);
    } else if (name == "verify-flux") {
      outcome = cmd_verify_flux(cfg, options);
    } else if (name == "verify-morawetz") {
      outcome = cmd_verify_morawetz(cfg, options);
    } else if (name == "scattering") {
      outcome = cmd_scattering(cfg, options);
    } else if (name == "convergence") {
      outcome = cmd_convergence(cfg, options);
    } else {
      err << "unknown command '" << name << "'\n";
      return 1;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ProbeError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "run failed: " << e.what() << "\n";
    return 2;
  } catch (const InconsistencyError& e) {
    err << "run failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& v : outcome.report.verdicts) {
    out << (v.passed ? "PASS " : "FAIL ") << v.name << " measured=" << format_number(v.measured) << " "
        << v.comparison << " " << format_number(v.tolerance) << "\n";
  }
  for (const auto& f : outcome.files) out << "wrote " << f.string() << "\n";
  return outcome.exit_code;
}

}  // namespace radwave::experiment

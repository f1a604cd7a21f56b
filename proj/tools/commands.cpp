#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>

#include "emzi/contrast_map.hpp"
#include "emzi/errors.hpp"
#include "emzi/talbot.hpp"
#include "output.hpp"

namespace sim {

using namespace emzi;
namespace fs = std::filesystem;

namespace {

std::string energy_tag(double ev) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gkeV", ev / 1e3);
  return buf;
}

void describe(CsvTable& t, const std::string& command, const RunContext& ctx) {
  t.meta(std::string("sim ") + kVersion);
  t.meta("command", command);
  t.meta("resolved config follows; strip the leading '# config: ' to reuse it");
  for (const auto& line : render_config(ctx.config)) t.meta("config: " + line);
}

void emit(const RunContext& ctx, const std::string& name, const std::string& content) {
  write_atomic(ctx.out_dir / name, content);
  if (ctx.log) *ctx.log << "  wrote " << (ctx.out_dir / name).string() << "\n";
}

void emit_svg(const RunContext& ctx, const std::string& name, const std::string& content) {
  if (ctx.config.write_svg) emit(ctx, name, content);
}

std::string yes(bool b) { return b ? "1" : "0"; }

SamplingPlan certified_plan(const RunConfig& c, const GeometrySpec& g) {
  auto plan = plan_sampling(g, c.sampling_options());
  plan.require_certified();
  return plan;
}

// Fails fast (before any propagation) when the shift lattice cannot support a fit.
std::vector<double> checked_shifts(const RunConfig& c) {
  FringeScan probe;
  probe.shifts = shift_range(c.scan.shift_start, c.scan.shift_stop, c.scan.shift_step);
  probe.fluxes.assign(probe.shifts.size(), 1.0);
  (void)fit_fringes(probe, {c.scan.period_min, c.scan.period_max});
  return probe.shifts;
}

PeriodBounds bounds(const RunConfig& c) { return {c.scan.period_min, c.scan.period_max}; }

RayBundleSpec bundle(const RunConfig& c) {
  RayBundleSpec b = c.classical.bundle;
  b.seed = c.seed;
  return b;
}

bool wants(const RunConfig& c, Engine e) {
  if (c.engine == EngineChoice::both) return true;
  return (e == Engine::quantum) == (c.engine == EngineChoice::quantum);
}

// Accepted source-point count for a set of detector slits.
CoherenceConvergence coherence_for(const RunConfig& c, const GeometrySpec& g, const SamplingPlan& plan,
                                   const std::vector<ApertureSpec>& slits) {
  return converge_source_points(g, c.coherence, slits, plan);
}

void describe_coherence(CsvTable& t, const CoherenceConvergence& cc) {
  std::string counts;
  for (auto n : cc.counts) counts += (counts.empty() ? "" : " ") + std::to_string(n);
  t.meta("source_point_counts_tried", counts);
  t.meta("source_points_used", std::to_string(cc.coherence.n_source_points));
  t.meta("source_points_converged", yes(cc.converged));
}

double centroid(const IntensityProfile& p, double a, double b) {
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double x = p.x(k);
    if (x < a || x > b) continue;
    m0 += p.values[k];
    m1 += p.values[k] * x;
  }
  return m0 > 0.0 ? m1 / m0 : 0.0;
}

// --- validate -----------------------------------------------------------------

int cmd_validate(const RunContext& ctx) {
  const auto& c = ctx.config;
  CsvTable t({"energy_ev", "leg", "distance_m", "dx_m", "nyquist_dx_m", "nyquist_margin", "max_reach_m",
              "wrap_budget_m", "nyquist_ok", "wrap_ok", "certified"});
  describe(t, "validate", ctx);
  bool all = true;
  for (double e : c.energies_ev) {
    const auto g = c.geometry(e);
    const auto plan = plan_sampling(g, c.sampling_options());
    const auto mz = mach_zehnder_criterion(g);
    const std::string tag = energy_tag(e);
    t.meta(tag + ".dx_m", plan.dx);
    t.meta(tag + ".n_samples", std::to_string(plan.n_samples));
    t.meta(tag + ".grid_half_width_m", plan.grid_half_width());
    t.meta(tag + ".resolves_grating", yes(plan.resolves_grating));
    t.meta(tag + ".order_separation_at_g2_m", mz.order_separation_at_g2);
    t.meta(tag + ".beam_width_at_g2_m", mz.beam_width_at_g2);
    t.meta(tag + ".separation_to_width", mz.ratio);
    if (ctx.log) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s: dx %.4g nm, N %zu, grid +-%.4g um, %s\n", tag.c_str(), plan.dx * 1e9,
                    plan.n_samples, plan.grid_half_width() * 1e6,
                    plan.resolves_grating ? "grating resolved" : "GRATING UNDER-RESOLVED");
      *ctx.log << buf;
      std::snprintf(buf, sizeof buf, "  separation at G2 %.4g um, beam width %.4g um, ratio %.3f\n",
                    mz.order_separation_at_g2 * 1e6, mz.beam_width_at_g2 * 1e6, mz.ratio);
      *ctx.log << buf;
    }
    for (const auto& leg : plan.legs) {
      t.row({fmt17(e), leg.name, fmt17(leg.distance), fmt17(plan.dx), fmt17(leg.nyquist_dx),
             fmt17(leg.nyquist_dx / plan.dx), fmt17(leg.max_reach), fmt17(leg.wrap_budget), yes(leg.nyquist_ok),
             yes(leg.wrap_ok), yes(leg.certified())});
      if (ctx.log) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "  %-16s Nyquist margin %7.3f  reach %9.4g um / budget %9.4g um  %s\n",
                      leg.name.c_str(), leg.nyquist_dx / plan.dx, leg.max_reach * 1e6, leg.wrap_budget * 1e6,
                      leg.certified() ? "certified" : "NOT CERTIFIED");
        *ctx.log << buf;
      }
    }
    all = all && plan.certified();
  }
  emit(ctx, "validate.csv", t.str());
  return all ? 0 : 3;
}

// --- pattern ------------------------------------------------------------------

int cmd_pattern(const RunContext& ctx) {
  const auto& c = ctx.config;
  CsvTable summary({"energy_ev", "wavelength_m", "port1_predicted_m", "port1_centroid_m", "zero_order_centroid_m",
                    "measured_separation_m", "measured_over_predicted"});
  describe(summary, "pattern", ctx);
  for (double e : c.energies_ev) {
    const auto g = c.geometry(e);
    const auto plan = certified_plan(c, g);
    const double p1 = output_port_position(g, 1) - output_port_position(g, 0);
    const std::vector<ApertureSpec> slits{{c.apparatus.detector_slit_width, output_port_position(g, 0), 0.0},
                                          {c.apparatus.detector_slit_width, output_port_position(g, 1), 0.0}};
    const auto cc = coherence_for(c, g, plan, slits);
    const auto full = detector_pattern(g, cc.coherence, plan);
    const double half = std::min(c.pattern.half_width, plan.grid_half_width());
    const auto p = full.cropped(-half, half);

    const std::string tag = energy_tag(e);
    CsvTable t({"x_m", "intensity_per_m"});
    describe(t, "pattern", ctx);
    t.meta("energy_ev", e);
    t.meta("wavelength_m", g.beam.wavelength());
    t.meta("dx_m", plan.dx);
    t.meta("n_samples", std::to_string(plan.n_samples));
    describe_coherence(t, cc);
    for (int port = 0; port < 3; ++port) t.meta("port" + std::to_string(port) + "_center_m", output_port_position(g, port));
    t.meta("normalization", "unit integral over the full grid");
    for (std::size_t k = 0; k < p.size(); ++k) t.row(std::vector<double>{p.x(k), p.values[k]});
    emit(ctx, "pattern_" + tag + ".csv", t.str());

    const double a = std::abs(p1);
    const double zero = centroid(full, output_port_position(g, 0) - 0.5 * a, output_port_position(g, 0) + 0.5 * a);
    const double first = centroid(full, output_port_position(g, 0) + 0.5 * a, output_port_position(g, 0) + 1.5 * a);
    summary.row(std::vector<double>{e, g.beam.wavelength(), p1, first, zero, first - zero, (first - zero) / p1});

    Series s{"quantum, " + tag, {}, {}};
    for (std::size_t k = 0; k < p.size(); ++k) {
      s.x.push_back(p.x(k) * 1e6);
      s.y.push_back(p.values[k] * 1e-6);
    }
    std::vector<Marker> marks;
    for (int port = 0; port < 3; ++port) marks.push_back({output_port_position(g, port) * 1e6, "port " + std::to_string(port)});
    emit_svg(ctx, "pattern_" + tag + ".svg",
             svg_line_plot("Detector pattern, " + tag, "x [um]", "intensity [1/um]", {s}, marks));
    if (ctx.log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: port 1 at %.4g um, measured separation %.4g um (%.4f of predicted)\n",
                    tag.c_str(), p1 * 1e6, (first - zero) * 1e6, (first - zero) / p1);
      *ctx.log << buf;
    }
  }
  emit(ctx, "pattern_summary.csv", summary.str());
  return 0;
}

// --- scan ---------------------------------------------------------------------

struct ScanResult {
  FringeScan scan;
  FringeFit fit;
};

int cmd_scan(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto shifts = checked_shifts(c);
  const bool noisy = c.noise.count_rate > 0.0;
  const bool drift = c.noise.drift > 0.0;
  std::vector<std::string> cols{"energy_ev", "engine", "port", "detector_center_m", "period_m", "contrast",
                                "phase_rad", "offset", "amplitude", "residual_rms", "converged"};
  if (noisy) cols.insert(cols.end(), {"noisy_period_m", "noisy_contrast"});
  if (drift) {
    cols.insert(cols.end(), {"linear_drift_factor", "gaussian_drift_factor", "contrast_linear_drift",
                             "contrast_gaussian_drift"});
  }
  CsvTable summary(cols);
  describe(summary, "scan", ctx);
  if (drift) summary.meta("drift_m", c.noise.drift);

  for (double e : c.energies_ev) {
    const auto g = c.geometry(e);
    const std::string tag = energy_tag(e);
    const ApertureSpec slit{c.apparatus.detector_slit_width, output_port_position(g, c.scan.port) + c.scan.detector_offset,
                            g.z_detector()};
    std::vector<Series> plot;
    for (Engine engine : {Engine::quantum, Engine::classical}) {
      if (!wants(c, engine)) continue;
      std::vector<std::pair<std::string, std::string>> meta;
      auto note = [&](const std::string& k, double v) { meta.emplace_back(k, fmt17(v)); };
      ScanResult r;
      if (engine == Engine::quantum) {
        const auto plan = certified_plan(c, g);
        const auto cc = coherence_for(c, g, plan, {slit});
        r.scan = scan_middle_grating(g, cc.coherence, shifts, slit, plan);
        meta.emplace_back("source_points_used", std::to_string(cc.coherence.n_source_points));
        meta.emplace_back("source_points_converged", yes(cc.converged));
        note("dx_m", plan.dx);
        meta.emplace_back("n_samples", std::to_string(plan.n_samples));
        meta.emplace_back("flux_normalization", "fraction of the flux leaving the collimator slit");
      } else {
        r.scan = moire_scan(g, bundle(c), shifts, slit);
        meta.emplace_back("flux_normalization", "fraction of rays crossing both collimation slits");
      }
      r.scan.metadata.port = c.scan.port;
      r.fit = fit_fringes(r.scan, bounds(c));
      meta.emplace_back("engine", to_string(engine));
      note("energy_ev", e);
      meta.emplace_back("port", std::to_string(c.scan.port));
      note("detector_center_m", slit.center);
      note("fit.period_m", r.fit.period);
      note("fit.contrast", r.fit.contrast);
      note("fit.phase_rad", r.fit.phase);

      std::vector<std::string> srow{fmt17(e), to_string(engine), std::to_string(c.scan.port), fmt17(slit.center),
                                    fmt17(r.fit.period), fmt17(r.fit.contrast), fmt17(r.fit.phase),
                                    fmt17(r.fit.offset), fmt17(r.fit.amplitude), fmt17(r.fit.residual_rms),
                                    yes(r.fit.converged)};
      std::vector<std::string> columns{"shift_m", "flux", "fit"};
      FringeScan counts, lin, gauss;
      if (noisy) {
        counts = apply_poisson_noise(r.scan, c.noise.count_rate, c.noise.dwell, c.seed, c.noise.sweeps);
        const auto nf = fit_fringes(counts, bounds(c));
        srow.insert(srow.end(), {fmt17(nf.period), fmt17(nf.contrast)});
        note("counts.period_m", nf.period);
        note("counts.contrast", nf.contrast);
        columns.push_back("counts");
      }
      if (drift) {
        const double fl = drift_contrast_factor(LinearDrift{c.noise.drift}, r.fit.period);
        const double fg = drift_contrast_factor(GaussianJitter{c.noise.drift}, r.fit.period);
        lin = apply_drift(r.scan, LinearDrift{c.noise.drift}, r.fit);
        gauss = apply_drift(r.scan, GaussianJitter{c.noise.drift}, r.fit);
        srow.insert(srow.end(), {fmt17(fl), fmt17(fg), fmt17(fit_fringes(lin, bounds(c)).contrast),
                                 fmt17(fit_fringes(gauss, bounds(c)).contrast)});
        columns.insert(columns.end(), {"flux_linear_drift", "flux_gaussian_drift"});
      }
      summary.row(srow);

      CsvTable data(columns);
      describe(data, "scan", ctx);
      for (const auto& [k, v] : meta) data.meta(k, v);
      for (std::size_t i = 0; i < r.scan.shifts.size(); ++i) {
        std::vector<double> row{r.scan.shifts[i], r.scan.fluxes[i], evaluate(r.fit, r.scan.shifts[i])};
        if (noisy) row.push_back(counts.fluxes[i]);
        if (drift) {
          row.push_back(lin.fluxes[i]);
          row.push_back(gauss.fluxes[i]);
        }
        data.row(row);
      }
      emit(ctx, "scan_" + std::string(to_string(engine)) + "_" + tag + ".csv", data.str());

      const double mean = std::accumulate(r.scan.fluxes.begin(), r.scan.fluxes.end(), 0.0) /
                          static_cast<double>(r.scan.fluxes.size());
      Series s{std::string(to_string(engine)) + " (C = " + fmt17(std::round(r.fit.contrast * 1e4) / 1e4) + ")", {}, {},
               engine == Engine::quantum ? "#1f77b4" : "#d62728", true};
      for (std::size_t i = 0; i < r.scan.shifts.size(); ++i) {
        s.x.push_back(r.scan.shifts[i] * 1e9);
        s.y.push_back(r.scan.fluxes[i] / mean);
      }
      plot.push_back(std::move(s));
      if (ctx.log) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s %-9s port %d: period %.3f nm, contrast %.4f\n", tag.c_str(), to_string(engine),
                      c.scan.port, r.fit.period * 1e9, r.fit.contrast);
        *ctx.log << buf;
      }
    }
    emit_svg(ctx, "scan_" + tag + ".svg",
             svg_line_plot("Middle-grating scan, " + tag + ", port " + std::to_string(c.scan.port),
                           "middle grating position [nm]", "flux / mean", plot));
  }
  emit(ctx, "scan_summary.csv", summary.str());
  return 0;
}

// --- contrast-map / moire -----------------------------------------------------

std::string describe_rays(const RayConvergence& rc) {
  std::string s;
  for (std::size_t i = 0; i < rc.counts.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%zu:%.6f", i ? " " : "", rc.counts[i], rc.max_contrast[i]);
    s += buf;
  }
  return s;
}

std::vector<ContrastPoint> classical_map(const RunConfig& c, const GeometrySpec& g, const std::vector<double>& positions,
                                         const std::vector<double>& shifts, const ContrastMapOptions& opt,
                                         CsvTable& t) {
  if (c.classical.bundle.quadrature == RayBundleSpec::Quadrature::monte_carlo) {
    t.meta("ray_quadrature", "monte_carlo");
    return moire_contrast_map(g, bundle(c), positions, shifts, opt);
  }
  const auto rc = converge_moire_contrast(g, bundle(c), positions, shifts, opt, c.classical.convergence_tol,
                                          c.classical.max_samples);
  t.meta("ray_convergence(samples_per_slit:max_contrast)", describe_rays(rc));
  t.meta("ray_samples_used", std::to_string(rc.bundle.n_source_samples));
  t.meta("ray_converged", yes(rc.converged));
  return rc.map;
}

int cmd_contrast_map(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto shifts = checked_shifts(c);
  ContrastMapOptions opt;
  opt.bounds = bounds(c);
  opt.slit_width = c.apparatus.detector_slit_width;
  opt.min_relative_flux = c.map.min_relative_flux;
  const auto offsets = position_range(c.map.start, c.map.stop, c.map.step);
  const bool q = wants(c, Engine::quantum), cl = wants(c, Engine::classical);

  for (double e : c.energies_ev) {
    const auto g = c.geometry(e);
    const std::string tag = energy_tag(e);
    const double origin = output_port_position(g, c.map.port);
    std::vector<double> positions;
    for (double o : offsets) positions.push_back(origin + o);

    CsvTable t({"position_m", "offset_from_port_m", "C_quantum", "period_quantum_m", "flux_quantum",
                "significant_quantum", "C_classical", "period_classical_m", "flux_classical", "significant_classical",
                "ratio"});
    describe(t, "contrast-map", ctx);
    t.meta("energy_ev", e);
    t.meta("port", std::to_string(c.map.port));
    t.meta("port_center_m", origin);

    std::vector<ContrastPoint> qm, cm;
    if (q) {
      const auto plan = certified_plan(c, g);
      std::vector<ApertureSpec> slits;
      for (double p : positions) slits.push_back({opt.slit_width, p, 0.0});
      const auto cc = coherence_for(c, g, plan, slits);
      describe_coherence(t, cc);
      qm = contrast_vs_detector(g, cc.coherence, positions, shifts, plan, opt);
    }
    if (cl) cm = classical_map(c, g, positions, shifts, opt, t);
    const double qmax = q ? max_significant_contrast(qm) : 0.0;
    const double cmax = cl ? max_significant_contrast(cm) : 0.0;
    if (q) t.meta("max_significant_C_quantum", qmax);
    if (cl) t.meta("max_significant_C_classical", cmax);
    if (q && cl && cmax > 0.0) t.meta("ratio_of_maxima", qmax / cmax);
    t.meta("significance", "mean flux >= " + fmt17(opt.min_relative_flux) + " of the map's peak mean flux");

    Series sq{"quantum", {}, {}, "#1f77b4", true}, sc{"classical", {}, {}, "#d62728", true};
    for (std::size_t i = 0; i < positions.size(); ++i) {
      std::vector<std::string> row{fmt17(positions[i]), fmt17(offsets[i])};
      auto cells = [&](const std::vector<ContrastPoint>& m) -> std::vector<std::string> {
        if (m.empty()) return {"", "", "", ""};
        return {fmt17(m[i].fit.contrast), fmt17(m[i].fit.period), fmt17(m[i].mean_flux), yes(m[i].significant)};
      };
      for (auto& s : cells(qm)) row.push_back(s);
      for (auto& s : cells(cm)) row.push_back(s);
      row.push_back(q && cl && cm[i].fit.contrast > 0.0 ? fmt17(qm[i].fit.contrast / cm[i].fit.contrast) : "");
      t.row(row);
      if (q) sq.x.push_back(offsets[i] * 1e6), sq.y.push_back(qm[i].fit.contrast);
      if (cl) sc.x.push_back(offsets[i] * 1e6), sc.y.push_back(cm[i].fit.contrast);
    }
    emit(ctx, "contrast_map_" + tag + ".csv", t.str());
    std::vector<Series> plot;
    if (q) plot.push_back(sq);
    if (cl) plot.push_back(sc);
    emit_svg(ctx, "contrast_map_" + tag + ".svg",
             svg_line_plot("Fringe contrast vs detector position, " + tag,
                           "detector offset from port " + std::to_string(c.map.port) + " [um]", "contrast", plot));
    if (ctx.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%s: max significant contrast quantum %.4f, classical %.4f\n", tag.c_str(), qmax, cmax);
      *ctx.log << buf;
    }
  }
  return 0;
}

int cmd_moire(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto shifts = checked_shifts(c);
  ContrastMapOptions opt;
  opt.bounds = bounds(c);
  opt.slit_width = c.apparatus.detector_slit_width;
  opt.min_relative_flux = c.map.min_relative_flux;
  const auto offsets = position_range(c.map.start, c.map.stop, c.map.step);
  // Straight rays carry no wavelength, so the first energy stands for all.
  const auto g = c.geometry(c.energies_ev.front());
  const double origin = output_port_position(g, c.map.port);
  std::vector<double> positions;
  for (double o : offsets) positions.push_back(origin + o);

  CsvTable t({"position_m", "offset_from_port_m", "C_classical", "period_classical_m", "flux_classical",
              "significant_classical"});
  describe(t, "moire", ctx);
  const auto map = classical_map(c, g, positions, shifts, opt, t);
  t.meta("max_significant_C_classical", max_significant_contrast(map));
  for (std::size_t i = 0; i < map.size(); ++i) {
    t.row({fmt17(positions[i]), fmt17(offsets[i]), fmt17(map[i].fit.contrast), fmt17(map[i].fit.period),
           fmt17(map[i].mean_flux), yes(map[i].significant)});
  }
  emit(ctx, "moire_map.csv", t.str());

  // Scan at the map's strongest significant position (the first-order ports get no rays).
  const auto best = argmax_significant_contrast(map);
  const double center = best < map.size() ? positions[best] : origin;
  const ApertureSpec slit{opt.slit_width, center, g.z_detector()};
  const auto scan = moire_scan(g, bundle(c), shifts, slit);
  const auto fit = fit_fringes(scan, opt.bounds);
  CsvTable s({"shift_m", "flux", "fit"});
  describe(s, "moire", ctx);
  s.meta("detector_center_m", slit.center);
  s.meta("fit.period_m", fit.period);
  s.meta("fit.contrast", fit.contrast);
  for (std::size_t i = 0; i < scan.shifts.size(); ++i) {
    s.row(std::vector<double>{scan.shifts[i], scan.fluxes[i], evaluate(fit, scan.shifts[i])});
  }
  emit(ctx, "moire_scan.csv", s.str());
  Series ser{"classical", {}, {}, "#d62728", true};
  for (std::size_t i = 0; i < map.size(); ++i) ser.x.push_back(offsets[i] * 1e6), ser.y.push_back(map[i].fit.contrast);
  emit_svg(ctx, "moire_map.svg",
           svg_line_plot("Classical Moire contrast", "detector offset from port " + std::to_string(c.map.port) + " [um]",
                         "contrast", {ser}));
  if (ctx.log) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "classical: max significant contrast %.4f; scan at %.3g um: period %.3f nm, contrast %.4f\n",
                  max_significant_contrast(map), center * 1e6, fit.period * 1e9, fit.contrast);
    *ctx.log << buf;
  }
  return 0;
}

// --- talbot -------------------------------------------------------------------

int cmd_talbot(const RunContext& ctx) {
  const auto& c = ctx.config;
  const double spacing = c.apparatus.distances.grating1_to_grating2;
  GratingSpec grating;
  grating.period = c.apparatus.grating_period;
  grating.open_fraction = c.apparatus.open_fraction;

  CsvTable report({"energy_ev", "wavelength_m", "talbot_length_m", "spacing_m", "ratio", "nearest_multiple",
                   "mismatch", "corr_half_length", "corr_half_length_shifted", "corr_length", "corr_length_shifted",
                   "corr_twice_length", "contrast_half_length"});
  describe(report, "talbot", ctx);
  report.meta("corr_*: correlation with the grating-plane intensity; *_shifted after a half-period displacement");
  for (double e : c.energies_ev) {
    const double lambda = wavelength_from_energy(e * 1.602176634e-19);
    const auto r = talbot_report(grating.period, lambda, spacing);
    const auto& spp = c.talbot.samples_per_period;
    const auto& np = c.talbot.n_periods;
    const auto base = talbot_carpet(grating, lambda, r.talbot_length, 1, spp, np).grating_intensity;
    auto corr = [&](double z, double shift) {
      return periodic_correlation(talbot_slice(grating, lambda, z, spp, np), base, shift);
    };
    const auto half = talbot_slice(grating, lambda, 0.5 * r.talbot_length, spp, np);
    report.row({fmt17(e), fmt17(lambda), fmt17(r.talbot_length), fmt17(spacing), fmt17(r.ratio),
                std::to_string(r.nearest_multiple), fmt17(r.mismatch), fmt17(corr(0.5 * r.talbot_length, 0.0)),
                fmt17(corr(0.5 * r.talbot_length, 0.5 * grating.period)), fmt17(corr(r.talbot_length, 0.0)),
                fmt17(corr(r.talbot_length, 0.5 * grating.period)), fmt17(corr(2.0 * r.talbot_length, 0.0)),
                fmt17(pattern_contrast(half))});
    if (ctx.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%s: Talbot length %.5g mm, spacing/L_T %.3f (nearest %ld)\n", energy_tag(e).c_str(),
                    r.talbot_length * 1e3, r.ratio, r.nearest_multiple);
      *ctx.log << buf;
    }
  }
  emit(ctx, "talbot_report.csv", report.str());

  const double e0 = c.energies_ev.front();
  const double lambda = wavelength_from_energy(e0 * 1.602176634e-19);
  const double lt = talbot_length(grating.period, lambda);
  const double z_max = c.talbot.z_max > 0.0 ? c.talbot.z_max : 2.0 * lt;
  const auto carpet = talbot_carpet(grating, lambda, z_max, c.talbot.n_planes, c.talbot.samples_per_period, c.talbot.n_periods);
  CsvTable t({"z_m", "x_m", "intensity"});
  describe(t, "talbot", ctx);
  t.meta("energy_ev", e0);
  t.meta("talbot_length_m", lt);
  t.meta("illumination", "unit-amplitude plane wave, periodic grid");
  std::vector<std::vector<double>> img;
  img.push_back(carpet.grating_intensity.values);
  for (std::size_t k = 0; k < carpet.grating_intensity.size(); ++k) {
    t.row(std::vector<double>{0.0, carpet.grating_intensity.x(k), carpet.grating_intensity.values[k]});
  }
  for (std::size_t j = 0; j < carpet.z.size(); ++j) {
    const auto& s = carpet.slices[j];
    for (std::size_t k = 0; k < s.size(); ++k) t.row(std::vector<double>{carpet.z[j], s.x(k), s.values[k]});
    img.push_back(s.values);
  }
  emit(ctx, "talbot_carpet.csv", t.str());
  const auto& gi = carpet.grating_intensity;
  emit_svg(ctx, "talbot_carpet.svg",
           svg_heat_map("Talbot carpet, " + energy_tag(e0) + " (L_T = " + fmt17(std::round(lt * 1e6) / 1e3) + " mm)",
                        "x [nm]", "z / L_T", gi.x_min * 1e9, (gi.x_max() + gi.dx) * 1e9, 0.0, z_max / lt, img));
  return 0;
}

using Command = std::function<int(const RunContext&)>;

const std::map<std::string, Command>& table() {
  static const std::map<std::string, Command> t{{"validate", cmd_validate}, {"pattern", cmd_pattern},
                                                {"scan", cmd_scan},         {"contrast-map", cmd_contrast_map},
                                                {"moire", cmd_moire},       {"talbot", cmd_talbot}};
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate", "pattern", "scan", "contrast-map", "moire", "talbot"};
  return names;
}

int run_command(const std::string& name, const RunContext& ctx) {
  const auto it = table().find(name);
  if (it == table().end()) throw ConfigError("", 0, "unknown command '" + name + "'");
  ensure_directory(ctx.out_dir);
  return it->second(ctx);
}

int exit_status_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SamplingViolation& e) {
    err << "sampling error [" << e.leg() << "]: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace sim

#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "beat_theory.hpp"
#include "master_eq.hpp"
#include "version.hpp"

namespace qbeat {

namespace fs = std::filesystem;

void RunReport::check(bool pass, const std::string& what) {
  lines.push_back(std::string(pass ? "PASS " : "FAIL ") + what);
  if (!pass) ok = false;
}

void RunReport::note(const std::string& what) {
  lines.push_back("INFO " + what);
}

void write_click_record(const std::string& path, const ClickRecord& record,
                        const Provenance& prov) {
  CsvWriter csv(path, prov, "timestamp_us,channel,trajectory_id");
  char buf[64];
  for (const auto& ev : record.events) {
    std::snprintf(buf, sizeof(buf), "%.4f,%c,%u", ev.t_us, ev.channel,
                  ev.trajectory);
    csv.raw_row(buf);
  }
}

namespace {

void write_g2_csv(const std::string& path, const CorrelationEstimate& est,
                  const Provenance& prov) {
  CsvWriter csv(path, prov, "tau_us,g2,stderr,pairs");
  for (size_t k = 0; k < est.tau_us.size(); ++k)
    csv.row({est.tau_us[k], est.g2[k], est.stderr_[k],
             static_cast<double>(est.pairs[k])});
}

void write_spectrum_csv(const std::string& path,
                        const std::vector<SpectrumPoint>& spec,
                        const Provenance& prov) {
  CsvWriter csv(path, prov, "freq_MHz,power");
  for (const auto& p : spec) csv.row({p.freq_mhz, p.power});
}

void run_theory(const RunConfig& cfg, const std::string& dir, RunReport& rep,
                const Provenance& prov) {
  const double g = mhz_to_radus(cfg.get_double("system.g_mhz"));
  const double gamma = mhz_to_radus(cfg.get_double("system.gamma_mhz"));
  const double alpha2 = cfg.get_double("system.n_photons");
  const double lo = cfg.get_double("analysis.theory_delta_min_mhz");
  const double hi = cfg.get_double("analysis.theory_delta_max_mhz");
  const int n = cfg.get_int("analysis.theory_points");

  const std::string path = dir + "/theory.csv";
  CsvWriter csv(path, prov,
                "delta_mhz,delta_jump_mhz,gamma_decoh_mhz,ratio,ac_stark_mhz");
  bool identity_ok = true;
  for (int i = 0; i < n; ++i) {
    const double d_mhz = lo + (hi - lo) * i / (n - 1);
    const double d = mhz_to_radus(d_mhz);
    const double dj = delta_jump(g, alpha2, d, gamma);
    const double gd = gamma_decoh(g, alpha2, d, gamma);
    const double as = ac_stark(g, alpha2, d, gamma);
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (d != 0.0) {
      ratio = resolvedness(g, alpha2, d, gamma);
      if (std::abs(ratio - 2.0 * d / gamma) > 1e-12 * std::max(1.0, std::abs(ratio)))
        identity_ok = false;
    }
    csv.row({d_mhz, radus_to_mhz(dj), radus_to_mhz(gd), ratio,
             radus_to_mhz(as)}, 17);
  }
  rep.artifacts.push_back(path);
  rep.check(identity_ok, "theory: gamma_decoh/(2 delta_jump) == 2 delta/gamma");
}

void run_beat(const RunConfig& cfg, const std::string& dir, RunReport& rep,
              const Provenance& prov) {
  const SystemModel model = cfg.system_model();
  const AnalysisOptions opt = cfg.analysis_options();
  EngineConfig base = cfg.engine_config();

  EngineConfig off = base;
  off.feedback.enabled = false;
  const EnsembleResult ens_off = run_ensemble(model, off);
  const CorrelationEstimate g2_off = g2_from_clicks(
      ens_off.clicks, opt.herald, opt.target, opt.bin_us, opt.max_tau_us);
  write_click_record(dir + "/clicks_nofeedback.csv", ens_off.clicks, prov);
  write_g2_csv(dir + "/g2_nofeedback.csv", g2_off, prov);
  rep.artifacts.push_back(dir + "/g2_nofeedback.csv");
  rep.check(!g2_off.empty_estimate, "beat: no-feedback estimate has data");

  const auto spec = g2_spectrum(g2_off, 0.2, 12.0, 0.02);
  write_spectrum_csv(dir + "/spectrum_nofeedback.csv", spec, prov);
  rep.artifacts.push_back(dir + "/spectrum_nofeedback.csv");
  rep.note("dominant peak " + format_double(dominant_peak_mhz(spec), 6) +
           " MHz (no feedback)");

  SvgPlot plot("Conditional intensity", "tau (us)", "g2(tau)");
  plot.add_curve(g2_off.tau_us, g2_off.g2, "#1f77b4", "no feedback");

  if (cfg.get_bool("feedback.enabled")) {
    const EnsembleResult ens_fb = run_ensemble(model, base);
    const CorrelationEstimate g2_fb =
        g2_from_clicks(ens_fb.clicks, opt.herald, opt.target, opt.bin_us,
                       opt.max_tau_us, &base.feedback);
    write_click_record(dir + "/clicks_feedback.csv", ens_fb.clicks, prov);
    write_g2_csv(dir + "/g2_feedback.csv", g2_fb, prov);
    rep.artifacts.push_back(dir + "/g2_feedback.csv");
    rep.check(!g2_fb.empty_estimate, "beat: feedback estimate has data");
    plot.add_curve(g2_fb.tau_us, g2_fb.g2, "#d62728", "feedback");
  }
  plot.write(dir + "/beat.svg", prov);
  rep.artifacts.push_back(dir + "/beat.svg");
}

void run_scan_epsilon(const RunConfig& cfg, const std::string& dir,
                      RunReport& rep, const Provenance& prov) {
  const SystemModel model = cfg.system_model();
  const AnalysisOptions opt = cfg.analysis_options();
  EngineConfig base = cfg.engine_config();
  const std::vector<double> eps = cfg.get_list("analysis.eps_list");

  const EpsilonScan scan = scan_feedback_intensity(
      model, base, eps, cfg.get_double("feedback.t_fb_us"), opt);

  const std::string path = dir + "/scan_epsilon.csv";
  CsvWriter csv(path, prov,
                "epsilon,amp_ratio,amp_err,phase_shift_rad,phase_err,converged");
  std::vector<double> xs, amps, aerrs, phs, perrs;
  bool all_converged = true;
  for (const auto& p : scan.points) {
    csv.raw_row(format_double(p.epsilon) + "," + format_double(p.amp_ratio) +
                "," + format_double(p.amp_ratio_err) + "," +
                format_double(p.phase_shift) + "," +
                format_double(p.phase_shift_err) + "," +
                (p.fit.converged ? "1" : "0"));
    xs.push_back(p.epsilon);
    amps.push_back(p.amp_ratio);
    aerrs.push_back(p.amp_ratio_err);
    phs.push_back(p.phase_shift);
    perrs.push_back(p.phase_shift_err);
    all_converged = all_converged && p.fit.converged;
  }
  rep.artifacts.push_back(path);
  rep.check(all_converged, "scan-epsilon: all fits converged");

  for (size_t i = 0; i < scan.points.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/g2_eps_%g.csv", scan.points[i].epsilon);
    write_g2_csv(dir + name, scan.traces[i], prov);
  }

  SvgPlot amp_plot("Recovered amplitude vs feedback intensity",
                   "normalized feedback intensity", "amplitude ratio");
  amp_plot.add_points(xs, amps, aerrs, "#d62728");
  amp_plot.add_curve(xs, amps, "#d62728");
  amp_plot.write(dir + "/scan_epsilon_amplitude.svg", prov);
  SvgPlot ph_plot("Phase shift vs feedback intensity",
                  "normalized feedback intensity", "phase shift (rad)");
  ph_plot.add_points(xs, phs, perrs, "#1f77b4");
  ph_plot.add_curve(xs, phs, "#1f77b4");
  ph_plot.write(dir + "/scan_epsilon_phase.svg", prov);
  rep.artifacts.push_back(dir + "/scan_epsilon_amplitude.svg");
  rep.artifacts.push_back(dir + "/scan_epsilon_phase.svg");
}

void run_scan_photon(const RunConfig& cfg, const std::string& dir,
                     RunReport& rep, const Provenance& prov) {
  SystemModel model = cfg.system_model();
  EngineConfig base = cfg.engine_config();
  if (base.sample_dt_us <= 0.0) base.sample_dt_us = 0.05;
  base.atom_init = AtomInit::GroundCoherence;
  const std::vector<double> n_list = cfg.get_list("analysis.n_list");

  const PhotonScan scan =
      scan_photon_number(model, base, n_list, cfg.get_double("analysis.fit_lo_us"),
                         cfg.get_double("analysis.fit_hi_us"));

  const std::string path = dir + "/scan_photon.csv";
  {
    CsvWriter csv(path, prov, "n_photons,freq_MHz,freq_err");
    for (const auto& p : scan.points)
      csv.row({p.n_photons, p.fit.freq_mhz, p.fit.err_freq});
    csv.comment("slope_mhz_per_photon=" + format_double(scan.freq_vs_n.slope));
    csv.comment("slope_err=" + format_double(scan.freq_vs_n.err_slope));
    csv.comment("theory_slope_mhz_per_photon=" +
                format_double(scan.theory_freq_slope_mhz));
  }
  rep.artifacts.push_back(path);

  const std::string dpath = dir + "/decay_vs_n.csv";
  {
    CsvWriter csv(dpath, prov, "n_photons,decay_per_us,decay_err");
    for (const auto& p : scan.points)
      csv.row({p.n_photons, p.fit.decay, p.fit.err_decay});
    csv.comment("slope_per_us_per_photon=" + format_double(scan.decay_vs_n.slope));
    csv.comment("slope_err=" + format_double(scan.decay_vs_n.err_slope));
    csv.comment("theory_slope_per_us_per_photon=" +
                format_double(scan.theory_decay_slope));
  }
  rep.artifacts.push_back(dpath);

  bool all_ok = true;
  for (const auto& p : scan.points)
    all_ok = all_ok && p.fit.converged && p.fit.freq_identifiable;
  rep.check(all_ok, "scan-photon: all fits converged and identifiable");
  rep.note("freq slope " + format_double(scan.freq_vs_n.slope) + " +- " +
           format_double(scan.freq_vs_n.err_slope) + " MHz/photon; theory " +
           format_double(scan.theory_freq_slope_mhz));

  std::vector<double> xs, ys, es, line_x, line_y;
  for (const auto& p : scan.points) {
    xs.push_back(p.n_photons);
    ys.push_back(p.fit.freq_mhz);
    es.push_back(p.fit.err_freq);
  }
  for (double x = 0.0; x <= xs.back() * 1.05; x += xs.back() / 50.0) {
    line_x.push_back(x);
    line_y.push_back(scan.freq_vs_n.intercept + scan.freq_vs_n.slope * x);
  }
  SvgPlot plot("Beat frequency vs drive photon number", "photon number n",
               "frequency (MHz)");
  plot.add_points(xs, ys, es, "#2ca02c");
  plot.add_curve(line_x, line_y, "#444444", "linear fit");
  plot.write(dir + "/scan_photon.svg", prov);
  rep.artifacts.push_back(dir + "/scan_photon.svg");
}

void run_validate(const RunConfig& cfg, const std::string& dir, RunReport& rep,
                  const Provenance& prov) {
  run_theory(cfg, dir, rep, prov);

  // trajectory ensemble vs dense master equation on the configured
  // constant-coupling model
  SystemModel model = cfg.system_model();
  model.displaced = false;
  model.n_slots = 1;
  EngineConfig ecfg = cfg.engine_config();
  ecfg.beam.enabled = false;
  ecfg.feedback.enabled = false;
  ecfg.warmup_us = 0.0;
  const int n_checkpoints = 10;
  ecfg.checkpoints_us.clear();
  for (int i = 1; i <= n_checkpoints; ++i)
    ecfg.checkpoints_us.push_back(ecfg.duration_us * i / n_checkpoints);

  const SystemOperators ops = SystemOperators::build(model);
  const EnsembleResult ens = run_ensemble(model, ecfg);

  const std::vector<cxd> psi0 =
      product_state(ops, ecfg.atom_init, ecfg.cavity_init);
  Eigen::Map<const Eigen::VectorXcd> v0(psi0.data(), ops.space.dim());
  Eigen::MatrixXcd rho = v0 * v0.adjoint();
  MasterEquation me(ops, {model.g_max});

  const std::string path = dir + "/validate_report.csv";
  CsvWriter csv(path, prov, "checkpoint_us,trace_distance");
  double t = 0.0;
  bool all_ok = true;
  const double trace0 = rho.trace().real();
  for (int i = 0; i < n_checkpoints; ++i) {
    rho = me.evolve(std::move(rho), t, ecfg.checkpoints_us[i]);
    t = ecfg.checkpoints_us[i];
    const Eigen::MatrixXcd rho_atom = reduced_atom_rho(rho, ops.space);
    const Eigen::MatrixXcd rho_ens = ens.rho_sum[i] / ens.count;
    const double td = trace_distance(rho_atom, rho_ens);
    csv.row({t, td});
    if (td >= 0.02) all_ok = false;
  }
  rep.artifacts.push_back(path);
  rep.check(all_ok, "validate: ensemble-vs-oracle trace distance < 0.02");
  rep.check(std::abs(rho.trace().real() - trace0) < 1e-8,
            "validate: oracle trace preserved to 1e-8");
  rep.check((rho - rho.adjoint().eval()).norm() < 1e-10,
            "validate: oracle hermiticity to 1e-10");
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg, const std::string& subcommand,
                         const std::string& out_dir) {
  RunReport rep;
  fs::create_directories(out_dir);
  Provenance prov{cfg.hash(), cfg.get_uint64("ensemble.seed"), QBEAT_VERSION};

  // resolved configuration echo
  {
    std::ofstream f(out_dir + "/resolved_config.txt", std::ios::binary);
    f << "# config_hash=" << prov.config_hash << "\n";
    f << cfg.serialize();
    rep.artifacts.push_back(out_dir + "/resolved_config.txt");
  }

  try {
    if (subcommand == "theory")
      run_theory(cfg, out_dir, rep, prov);
    else if (subcommand == "beat")
      run_beat(cfg, out_dir, rep, prov);
    else if (subcommand == "scan-epsilon")
      run_scan_epsilon(cfg, out_dir, rep, prov);
    else if (subcommand == "scan-photon")
      run_scan_photon(cfg, out_dir, rep, prov);
    else if (subcommand == "validate")
      run_validate(cfg, out_dir, rep, prov);
    else {
      rep.check(false, "unknown subcommand '" + subcommand + "'");
    }
  } catch (const std::exception& e) {
    rep.check(false, std::string("exception: ") + e.what());
  }

  std::ofstream f(out_dir + "/report.txt", std::ios::binary);
  for (const auto& line : rep.lines) f << line << "\n";
  f << (rep.ok ? "OK" : "FAILED") << "\n";
  return rep;
}

}  // namespace qbeat

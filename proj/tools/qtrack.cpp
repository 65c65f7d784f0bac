// Command-line front end: record generation, demodulation, filtering,
// verification statistics and spectral tables, all emitted as CSV/JSON plus
// a run manifest for reproducibility.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtrack/demod.hpp"
#include "qtrack/ensemble.hpp"
#include "qtrack/filters.hpp"
#include "qtrack/model.hpp"
#include "qtrack/record.hpp"
#include "qtrack/riccati.hpp"
#include "qtrack/simulate.hpp"
#include "qtrack/spectral.hpp"
#include "qtrack/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a_text(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const std::string& config_path, const std::string& config_text,
                    std::uint64_t seed, int threads,
                    const std::vector<std::string>& outputs, const json& options) {
  json m;
  m["tool"] = "qtrack";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config_path"] = config_path;
  m["config_hash"] = hex64(fnv1a_text(config_text));
  m["seed"] = seed;
  m["threads"] = threads;
  m["created_utc"] = utc_now();
  m["outputs"] = outputs;
  m["options"] = options;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

std::string segment_name(const char* prefix, std::size_t idx) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06zu.qtr", prefix, idx);
  return buf;
}

struct CommonArgs {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
};

qtrack::ModelParams load_params(const CommonArgs& a) {
  return qtrack::params_from_config_file(a.config);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw CLI::ValidationError("--points", "must be >= 2");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

int cmd_gen(const CommonArgs& common, std::size_t segments, double dt, double duration,
            bool carrier, double fs_mult, bool csv, const std::string& out_dir) {
  if (segments == 0) throw CLI::ValidationError("--segments", "must be > 0");
  const qtrack::ModelParams p = load_params(common);
  fs::create_directories(out_dir);
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  const double fs = fs_mult * qtrack::rad_to_hz(p.omega_m);

  std::vector<std::string> outputs(segments);
  qtrack::parallel_for(segments, common.threads, [&](std::size_t seg) {
    const qtrack::TruthTrajectory truth =
        qtrack::simulate_truth(p, dt, n, common.seed, seg);
    std::string name;
    if (carrier) {
      const qtrack::CarrierRecord rec =
          qtrack::synthesize_carrier(truth, p, fs, common.seed, seg);
      name = segment_name("car", seg);
      qtrack::write_carrier(rec, (fs::path(out_dir) / name).string());
    } else {
      const qtrack::MeasurementRecord rec = qtrack::measure(truth, p, common.seed, seg);
      name = segment_name("rec", seg);
      qtrack::write_record(rec, (fs::path(out_dir) / name).string());
      if (csv) {
        const std::string cname = name.substr(0, name.size() - 4) + ".csv";
        qtrack::write_record_csv(rec, (fs::path(out_dir) / cname).string());
      }
    }
    outputs[seg] = name;
  });

  json opts{{"segments", segments}, {"dt_s", dt},          {"duration_s", duration},
            {"carrier", carrier},   {"fs_mult", fs_mult},  {"csv", csv}};
  write_manifest(out_dir, "gen", common.config, read_file(common.config), common.seed,
                 common.threads, outputs, opts);
  std::cout << "wrote " << segments << (carrier ? " carrier" : " baseband")
            << " record(s) to " << out_dir << "\n";
  return 0;
}

int cmd_demod(const std::string& in_path, double omega_m_hz, const qtrack::DemodFilterSpec& spec,
              int decim, const std::string& out_path) {
  if (!(omega_m_hz > 0.0)) throw CLI::ValidationError("--omega-m-hz", "must be > 0");
  const qtrack::CarrierRecord carrier = qtrack::read_carrier(in_path);
  const qtrack::MeasurementRecord rec =
      qtrack::demodulate(carrier, qtrack::hz_to_rad(omega_m_hz), spec, decim);
  qtrack::write_record(rec, out_path);
  std::cout << "demodulated " << in_path << " -> " << out_path << " (" << rec.size()
            << " samples, dt = " << rec.dt << " s)\n";
  return 0;
}

int cmd_filter(const CommonArgs& common, const std::string& record_path, double v0,
               bool backward, const std::string& out_csv, const std::string& out_bin) {
  const qtrack::ModelParams p = load_params(common);
  const qtrack::DerivedRates rates = qtrack::derive_rates(p);
  const qtrack::MeasurementRecord rec = qtrack::read_record(record_path);
  const qtrack::StateTrajectory traj =
      backward ? qtrack::retrodict(rec, rates, v0) : qtrack::predict(rec, rates, v0);
  qtrack::write_trajectory_csv(traj, out_csv);
  if (!out_bin.empty())
    qtrack::write_trajectory(traj, rec.seed, rec.params_hash, out_bin);
  std::cout << (backward ? "retrodicted " : "predicted ") << record_path << " -> "
            << out_csv << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& common, std::size_t segments, double dt, double duration,
               double t0, const std::string& pipeline, const std::string& out_path) {
  const qtrack::ModelParams p = load_params(common);
  const qtrack::DerivedRates rates = qtrack::derive_rates(p);
  qtrack::EnsembleConfig cfg;
  cfg.n_segments = segments;
  cfg.dt = dt;
  cfg.duration = duration;
  cfg.seed = common.seed;
  cfg.threads = common.threads;

  // self-check: both filters must be steady at the comparison time (the
  // carrier pipeline also trims the filter settling off the record)
  const double settle = qtrack::steady_state_time(rates, rates.v_bath);
  double trim = 0.0;
  if (pipeline == "carrier") {
    const qtrack::DemodFilterSpec f{};
    trim = 5.0 * static_cast<double>(f.order * f.stages) / qtrack::hz_to_rad(f.cutoff_hz);
  }
  if (t0 < settle || t0 > duration - settle - 2.0 * trim)
    throw std::runtime_error(
        "t0 is outside the steady-state window [" + std::to_string(settle) + ", " +
        std::to_string(duration - settle - 2.0 * trim) + "] s; adjust --t0 or --duration");

  qtrack::VerificationReport rep;
  if (pipeline == "carrier") {
    qtrack::CarrierOptions copt;
    const qtrack::Ensemble ens = qtrack::run_carrier_ensemble(p, cfg, copt);
    const qtrack::SpectralModel model(rates, copt.filter);
    const double corr = qtrack::filter_correction(model);
    rep = qtrack::relative_variance(ens.pred, ens.retro, t0, rates, corr);
  } else if (pipeline == "baseband") {
    const qtrack::Ensemble ens = qtrack::run_baseband_ensemble(p, cfg);
    rep = qtrack::relative_variance(ens.pred, ens.retro, t0, rates);
  } else {
    throw CLI::ValidationError("--pipeline", "must be baseband or carrier");
  }

  const std::string text = rep.to_json();
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << text;
  std::cout << text;
  return 0;
}

int cmd_collapse(const CommonArgs& common, std::size_t segments, double dt, double duration,
                 double t0_max, std::size_t points, const std::string& out_path) {
  const qtrack::ModelParams p = load_params(common);
  qtrack::EnsembleConfig cfg;
  cfg.n_segments = segments;
  cfg.dt = dt;
  cfg.duration = duration;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  const std::vector<double> grid = linspace(0.0, t0_max, points);
  const qtrack::CollapseCurve curve = qtrack::collapse_curve(p, cfg, grid);
  qtrack::write_curve_csv(curve, out_path);
  std::cout << "collapse curve (" << points << " points) -> " << out_path << "\n";
  return 0;
}

int cmd_decohere(const CommonArgs& common, std::size_t segments, double dt, double duration,
                 double t_star, double t_max, std::size_t points, const std::string& out_path) {
  const qtrack::ModelParams p = load_params(common);
  qtrack::EnsembleConfig cfg;
  cfg.n_segments = segments;
  cfg.dt = dt;
  cfg.duration = duration;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  const std::vector<double> grid = linspace(t_star + dt, t_max, points);
  const qtrack::CollapseCurve curve = qtrack::decoherence_curve(p, t_star, cfg, grid);
  qtrack::write_curve_csv(curve, out_path);
  std::cout << "decoherence curve (t* = " << t_star << " s) -> " << out_path << "\n";
  return 0;
}

int cmd_riccati(const CommonArgs& common, double v0, double t_max, double dt,
                const std::string& direction, const std::string& out_path) {
  const qtrack::ModelParams p = load_params(common);
  const qtrack::DerivedRates rates = qtrack::derive_rates(p);
  const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
  if (v0 <= 0.0) v0 = rates.v_bath;
  qtrack::VarianceCurve curve;
  curve.t.resize(n);
  curve.v.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    curve.t[k] = t;
    curve.v[k] = direction == "backward" ? qtrack::v_e_backward(rates, v0, t)
                                         : qtrack::v_analytic(rates, v0, t);
  }
  curve.direction =
      direction == "backward" ? qtrack::Direction::backward : qtrack::Direction::forward;
  qtrack::write_csv(curve, out_path);
  std::cout << "variance curve -> " << out_path << "\n";
  return 0;
}

int cmd_spectral(const CommonArgs& common, const std::string& filter_sel,
                 const std::string& out_path) {
  const qtrack::ModelParams p = load_params(common);
  const qtrack::DerivedRates rates = qtrack::derive_rates(p);
  if (filter_sel == "none") {
    const qtrack::SpectralModel model(rates, std::nullopt);
    const qtrack::TableS1 base = qtrack::table_s1(model, false);
    qtrack::write_table_s1_csv(base, std::nullopt, out_path);
    std::printf("pred %.4f  retro %.4f  cross %.4f  sigma2 %.4f\n", base.pred_var,
                base.retro_var, base.cross, base.sigma2);
  } else if (filter_sel == "default") {
    const qtrack::SpectralModel model(rates, qtrack::DemodFilterSpec{});
    const qtrack::TableS1 base = qtrack::table_s1(model, false);
    const qtrack::TableS1 filt = qtrack::table_s1(model, true);
    qtrack::write_table_s1_csv(base, filt, out_path);
    std::printf("             without D     with D\n");
    std::printf("pred        %10.4f %10.4f\n", base.pred_var, filt.pred_var);
    std::printf("retro       %10.4f %10.4f\n", base.retro_var, filt.retro_var);
    std::printf("cross       %10.4f %10.4f\n", base.cross, filt.cross);
    std::printf("sigma2      %10.4f %10.4f   (difference %.2f%%, correction %.4f)\n",
                base.sigma2, filt.sigma2, 100.0 * (1.0 - filt.sigma2 / base.sigma2),
                base.sigma2 / filt.sigma2);
  } else {
    throw CLI::ValidationError("--filter", "must be default or none");
  }
  std::cout << "table -> " << out_path << "\n";
  return 0;
}

int cmd_figures(const CommonArgs& common, const std::string& which, std::size_t segments,
                double dt, double duration, const std::string& out_dir) {
  const qtrack::ModelParams p = load_params(common);
  const qtrack::DerivedRates rates = qtrack::derive_rates(p);
  fs::create_directories(out_dir);
  std::vector<std::string> outputs;
  json opts{{"which", which}, {"segments", segments}, {"dt_s", dt}, {"duration_s", duration}};

  qtrack::EnsembleConfig cfg;
  cfg.n_segments = segments;
  cfg.dt = dt;
  cfg.duration = duration;
  cfg.seed = common.seed;
  cfg.threads = common.threads;

  const auto n = static_cast<std::size_t>(std::llround(duration / dt));

  if (which == "fig1") {
    // single conditional trajectory with its variance schedule
    const qtrack::TruthTrajectory truth = qtrack::simulate_truth(p, dt, n, common.seed, 0);
    const qtrack::MeasurementRecord rec = qtrack::measure(truth, p, common.seed, 0);
    const qtrack::StateTrajectory traj = qtrack::predict(rec, rates);
    std::ofstream out(fs::path(out_dir) / "fig1_trajectory.csv");
    out << "t_s,r_x,r_y,v,truth_x,truth_y\n";
    out.precision(12);
    for (std::size_t k = 0; k < traj.size(); ++k)
      out << traj.time(k) << ',' << traj.mean_x[k] << ',' << traj.mean_y[k] << ','
          << traj.var(k) << ',' << truth.x[k] << ',' << truth.y[k] << '\n';
    outputs.push_back("fig1_trajectory.csv");
  } else if (which == "fig3") {
    // prediction/retrodiction endpoint pairs at a steady comparison time
    const qtrack::Ensemble ens = qtrack::run_baseband_ensemble(p, cfg);
    const double t0 = 0.5 * duration;
    const qtrack::VerificationReport rep =
        qtrack::relative_variance(ens.pred, ens.retro, t0, rates);
    std::ofstream out(fs::path(out_dir) / "fig3_pairs.csv");
    out << "segment,pred_x,pred_y,retro_x,retro_y,diff_x,diff_y\n";
    out.precision(12);
    for (std::size_t i = 0; i < ens.pred.size(); ++i) {
      const auto kp = ens.pred[i].index_of(t0);
      const auto kr = ens.retro[i].index_of(t0);
      out << i << ',' << ens.pred[i].mean_x[kp] << ',' << ens.pred[i].mean_y[kp] << ','
          << ens.retro[i].mean_x[kr] << ',' << ens.retro[i].mean_y[kr] << ','
          << ens.pred[i].mean_x[kp] - ens.retro[i].mean_x[kr] << ','
          << ens.pred[i].mean_y[kp] - ens.retro[i].mean_y[kr] << '\n';
    }
    outputs.push_back("fig3_pairs.csv");
    std::ofstream summary(fs::path(out_dir) / "fig3_summary.json");
    json s;
    s["sigma2"] = rep.sigma2;
    s["scatter_radius_2sigma"] = 2.0 * std::sqrt(rep.sigma2);
    s["pure_state_radius"] = 2.0;  // 2 sqrt(1)
    s["report"] = json::parse(rep.to_json());
    summary << s.dump(2) << "\n";
    outputs.push_back("fig3_summary.json");
  } else if (which == "fig4") {
    // collapse for t0 < t*, decoherence beyond, plus the retrodiction-only
    // (unconditional) variance
    const double t_star = 0.7e-3;
    qtrack::Ensemble ens = qtrack::run_baseband_ensemble(p, cfg);
    for (auto& traj : ens.pred) traj = qtrack::predict_unconditioned(traj, rates, t_star);
    const std::vector<double> grid = linspace(0.0, duration - 0.2e-3, 97);
    qtrack::CollapseCurve curve;
    curve.t0 = grid;
    {
      // theory: collapse branch before t*, rethermalization branch after
      std::vector<double> dx(ens.pred.size()), dy(ens.pred.size());
      curve.sigma2.resize(grid.size());
      curve.stderr_.resize(grid.size());
      curve.theory.resize(grid.size());
      curve.uncond.resize(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double sxx = 0.0, syy = 0.0, mx = 0.0, my = 0.0, ux = 0.0, uy = 0.0, umx = 0.0,
               umy = 0.0;
        for (std::size_t i = 0; i < ens.pred.size(); ++i) {
          const auto kp = ens.pred[i].index_of(grid[g]);
          const auto kr = ens.retro[i].index_of(grid[g]);
          dx[i] = ens.pred[i].mean_x[kp] - ens.retro[i].mean_x[kr];
          dy[i] = ens.pred[i].mean_y[kp] - ens.retro[i].mean_y[kr];
          mx += dx[i];
          my += dy[i];
          umx += ens.retro[i].mean_x[kr];
          umy += ens.retro[i].mean_y[kr];
        }
        const double nn = static_cast<double>(ens.pred.size());
        mx /= nn;
        my /= nn;
        umx /= nn;
        umy /= nn;
        for (std::size_t i = 0; i < ens.pred.size(); ++i) {
          sxx += (dx[i] - mx) * (dx[i] - mx);
          syy += (dy[i] - my) * (dy[i] - my);
          const auto kr = ens.retro[i].index_of(grid[g]);
          ux += (ens.retro[i].mean_x[kr] - umx) * (ens.retro[i].mean_x[kr] - umx);
          uy += (ens.retro[i].mean_y[kr] - umy) * (ens.retro[i].mean_y[kr] - umy);
        }
        curve.sigma2[g] = 0.5 * (sxx + syy) / (nn - 1.0);
        curve.stderr_[g] = curve.sigma2[g] / std::sqrt(nn - 1.0);
        curve.uncond[g] = 0.5 * (ux + uy) / (nn - 1.0);
        curve.theory[g] = grid[g] <= t_star
                              ? qtrack::v_analytic(rates, rates.v_bath, grid[g]) +
                                    rates.v_e_steady
                              : qtrack::decoherence_theory(rates, grid[g] - t_star);
      }
    }
    qtrack::write_curve_csv(curve, (fs::path(out_dir) / "fig4_sigma2.csv").string());
    outputs.push_back("fig4_sigma2.csv");
  } else if (which == "tableS1") {
    const qtrack::SpectralModel model(rates, qtrack::DemodFilterSpec{});
    const qtrack::TableS1 base = qtrack::table_s1(model, false);
    const qtrack::TableS1 filt = qtrack::table_s1(model, true);
    qtrack::write_table_s1_csv(base, filt, (fs::path(out_dir) / "table_s1.csv").string());
    outputs.push_back("table_s1.csv");
  } else {
    throw CLI::ValidationError("--which", "must be fig1, fig3, fig4 or tableS1");
  }

  write_manifest(out_dir, "figures", common.config, read_file(common.config), common.seed,
                 common.threads, outputs, opts);
  std::cout << "figure bundle " << which << " -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtrack: conditional-trajectory estimation for a continuously "
               "measured mechanical oscillator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs common;
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0: QTRACK_THREADS env or hardware)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate synthetic measurement records");
  std::size_t gen_segments = 1000;
  double gen_dt = 1e-6, gen_duration = 3.2e-3, gen_fs_mult = 16.0;
  bool gen_carrier = false, gen_csv = false;
  std::string gen_out;
  gen->add_option("--config", common.config, "model config (JSON)")->required();
  gen->add_option("--segments", gen_segments, "number of record segments");
  gen->add_option("--seed", common.seed, "RNG seed")->required();
  gen->add_option("--dt", gen_dt, "baseband sample interval, s");
  gen->add_option("--duration", gen_duration, "segment duration, s");
  gen->add_flag("--carrier", gen_carrier, "emit carrier-rate photocurrents instead");
  gen->add_option("--fs-mult", gen_fs_mult, "carrier rate as multiple of omega_m/2pi");
  gen->add_flag("--csv", gen_csv, "also export records as CSV");
  gen->add_option("--out", gen_out, "output directory")->required();

  // demod
  auto* demod = app.add_subcommand("demod", "IQ-demodulate a carrier photocurrent");
  std::string demod_in, demod_out;
  double demod_omega_hz = 0.0;
  qtrack::DemodFilterSpec demod_spec;
  int demod_decim = 0;
  demod->add_option("--in", demod_in, "carrier record file")->required();
  demod->add_option("--omega-m-hz", demod_omega_hz, "demodulation frequency, Hz")->required();
  demod->add_option("--cutoff-hz", demod_spec.cutoff_hz, "low-pass cutoff, Hz");
  demod->add_option("--order", demod_spec.order, "filter order per stage");
  demod->add_option("--stages", demod_spec.stages, "cascaded stages");
  demod->add_option("--decim", demod_decim, "decimation factor (0: auto)");
  demod->add_flag("--zero-phase", demod_spec.zero_phase, "forward-backward filtering");
  demod->add_option("--out", demod_out, "output record file")->required();

  // filter / retro
  auto* filt = app.add_subcommand("filter", "run the forward conditional filter");
  auto* retro = app.add_subcommand("retro", "run the backward retrodiction filter");
  std::string f_record, f_csv, f_bin;
  double f_v0 = 0.0;
  for (auto* sub : {filt, retro}) {
    sub->add_option("--config", common.config, "model config (JSON)")->required();
    sub->add_option("--record", f_record, "measurement record file")->required();
    sub->add_option("--v0", f_v0, "initial (final) variance; 0 = v_bath");
    sub->add_option("--out", f_csv, "trajectory CSV path")->required();
    sub->add_option("--binary", f_bin, "optional trajectory container path");
  }

  // verify
  auto* verify = app.add_subcommand("verify", "ensemble verification report");
  std::size_t v_segments = 1000;
  double v_dt = 1e-6, v_duration = 3.2e-3, v_t0 = 1.6e-3;
  std::string v_pipeline = "baseband", v_out;
  verify->add_option("--config", common.config, "model config (JSON)")->required();
  verify->add_option("--segments", v_segments, "ensemble size");
  verify->add_option("--seed", common.seed, "RNG seed")->required();
  verify->add_option("--dt", v_dt, "baseband sample interval, s");
  verify->add_option("--duration", v_duration, "segment duration, s");
  verify->add_option("--t0", v_t0, "comparison time, s");
  verify->add_option("--pipeline", v_pipeline, "baseband | carrier");
  verify->add_option("--out", v_out, "report JSON path")->required();

  // collapse
  auto* collapse = app.add_subcommand("collapse", "sigma^2(t0) collapse curve");
  std::size_t c_segments = 1000, c_points = 61;
  double c_dt = 1e-6, c_duration = 3.2e-3, c_t0max = 3.0e-3;
  std::string c_out;
  collapse->add_option("--config", common.config, "model config (JSON)")->required();
  collapse->add_option("--segments", c_segments, "ensemble size");
  collapse->add_option("--seed", common.seed, "RNG seed")->required();
  collapse->add_option("--dt", c_dt, "sample interval, s");
  collapse->add_option("--duration", c_duration, "segment duration, s");
  collapse->add_option("--t0-max", c_t0max, "last comparison time, s");
  collapse->add_option("--points", c_points, "grid points");
  collapse->add_option("--out", c_out, "curve CSV path")->required();

  // decohere
  auto* decohere = app.add_subcommand("decohere", "sigma^2(t) after unconditioning");
  std::size_t d_segments = 1000, d_points = 49;
  double d_dt = 1e-6, d_duration = 3.2e-3, d_tstar = 0.7e-3, d_tmax = 3.0e-3;
  std::string d_out;
  decohere->add_option("--config", common.config, "model config (JSON)")->required();
  decohere->add_option("--segments", d_segments, "ensemble size");
  decohere->add_option("--seed", common.seed, "RNG seed")->required();
  decohere->add_option("--dt", d_dt, "sample interval, s");
  decohere->add_option("--duration", d_duration, "segment duration, s");
  decohere->add_option("--t-star", d_tstar, "conditioning stop time, s");
  decohere->add_option("--t-max", d_tmax, "last comparison time, s");
  decohere->add_option("--points", d_points, "grid points");
  decohere->add_option("--out", d_out, "curve CSV path")->required();

  // riccati
  auto* ric = app.add_subcommand("riccati", "conditional-variance curve");
  double r_v0 = 0.0, r_tmax = 5e-4, r_dt = 1e-6;
  std::string r_direction = "forward", r_out;
  ric->add_option("--config", common.config, "model config (JSON)")->required();
  ric->add_option("--v0", r_v0, "initial (final) variance; 0 = v_bath");
  ric->add_option("--t-max", r_tmax, "curve span, s");
  ric->add_option("--dt", r_dt, "grid step, s");
  ric->add_option("--direction", r_direction, "forward | backward");
  ric->add_option("--out", r_out, "curve CSV path")->required();

  // spectral
  auto* spectral = app.add_subcommand("spectral", "frequency-domain statistics table");
  std::string s_filter = "default", s_out;
  spectral->add_option("--params,--config", common.config, "model config (JSON)")->required();
  spectral->add_option("--filter", s_filter, "default | none");
  spectral->add_option("--out", s_out, "table CSV path")->required();

  // figures
  auto* figures = app.add_subcommand("figures", "plot-ready CSV bundles");
  std::string fig_which, fig_out;
  std::size_t fig_segments = 1000;
  double fig_dt = 1e-6, fig_duration = 3.2e-3;
  figures->add_option("--config", common.config, "model config (JSON)")->required();
  figures->add_option("--which", fig_which, "fig1 | fig3 | fig4 | tableS1")->required();
  figures->add_option("--segments", fig_segments, "ensemble size");
  figures->add_option("--seed", common.seed, "RNG seed")->required();
  figures->add_option("--dt", fig_dt, "sample interval, s");
  figures->add_option("--duration", fig_duration, "segment duration, s");
  figures->add_option("--out", fig_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  common.threads = threads;

  try {
    if (gen->parsed())
      return cmd_gen(common, gen_segments, gen_dt, gen_duration, gen_carrier, gen_fs_mult,
                     gen_csv, gen_out);
    if (demod->parsed())
      return cmd_demod(demod_in, demod_omega_hz, demod_spec, demod_decim, demod_out);
    if (filt->parsed()) return cmd_filter(common, f_record, f_v0, false, f_csv, f_bin);
    if (retro->parsed()) return cmd_filter(common, f_record, f_v0, true, f_csv, f_bin);
    if (verify->parsed())
      return cmd_verify(common, v_segments, v_dt, v_duration, v_t0, v_pipeline, v_out);
    if (collapse->parsed())
      return cmd_collapse(common, c_segments, c_dt, c_duration, c_t0max, c_points, c_out);
    if (decohere->parsed())
      return cmd_decohere(common, d_segments, d_dt, d_duration, d_tstar, d_tmax, d_points,
                          d_out);
    if (ric->parsed()) return cmd_riccati(common, r_v0, r_tmax, r_dt, r_direction, r_out);
    if (spectral->parsed()) return cmd_spectral(common, s_filter, s_out);
    if (figures->parsed())
      return cmd_figures(common, fig_which, fig_segments, fig_dt, fig_duration, fig_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// polsq: command-line front end for the polarization-squeezing pair-source
// engine. Subcommands: point, sweep, optimize, dilution, oracle-check.
// Every subcommand accepts --config <json> and/or flags; flags override
// config. Units: fluxes in photons/s, delta_nu in Hz, tau in seconds.
// Exit codes: 0 success, 2 validation error, 3 numerical-accuracy failure,
// 4 partial sweep (some rows errored).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "polsqueeze/gaussian_oracle.hpp"
#include "polsqueeze/metrics.hpp"
#include "polsqueeze/sweep.hpp"
#include "polsqueeze/version.hpp"

using namespace polsq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAccuracy = 3;
constexpr int kExitPartialSweep = 4;

struct CommonOpts {
  std::optional<double> delta_nu, eta, mu, phi_s, phi_c, tau, delta_tau;
  std::optional<double> quad_rel_tol;
  std::optional<int> jobs;
  std::optional<std::string> variant;
  std::string config;
  std::string out;
  std::string format;  // "json" or "csv"; per-subcommand default
  bool no_timestamp = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config, "JSON config file; flags override it");
  sub->add_option("--delta-nu", o.delta_nu, "cavity FWHM bandwidth [Hz]");
  sub->add_option("--eta", o.eta, "cavity escape coefficient (0,1]");
  sub->add_option("--mu", o.mu, "pump fraction sqrt(P/Pth) in [0,1)");
  sub->add_option("--phi-s", o.phi_s, "squeezed-vacuum flux [photons/s]");
  sub->add_option("--phi-c", o.phi_c, "coherent-beam flux [photons/s]");
  sub->add_option("--tau", o.tau, "detection delay [s]");
  sub->add_option("--delta-tau", o.delta_tau, "coincidence window [s]");
  sub->add_option("--out", o.out, "output path (default: stdout)");
  sub->add_option("--format", o.format, "output format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--jobs", o.jobs, "worker threads for grid evaluation");
  sub->add_option("--quad-rel-tol", o.quad_rel_tol,
                  "relative tolerance for all quadratures");
  sub->add_option("--vvvv-variant", o.variant,
                  "R_VVVV closed form: gaussian|printed")
      ->check(CLI::IsMember({"gaussian", "printed"}));
  sub->add_flag("--no-timestamp", o.no_timestamp,
                "omit the provenance timestamp (byte-identical reruns)");
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

double pick(const std::optional<double>& flag, const nlohmann::json& cfg,
            std::initializer_list<const char*> keys, const char* what,
            std::optional<double> fallback = std::nullopt) {
  if (flag) return *flag;
  for (const char* k : keys)
    if (cfg.contains(k)) return cfg.at(k).get<double>();
  if (fallback) return *fallback;
  throw ValidationError(std::string("missing required parameter '") + what + "'");
}

OpoParams params_from(const CommonOpts& o, const nlohmann::json& cfg) {
  const double dnu = pick(o.delta_nu, cfg, {"delta_nu", "delta_nu_hz"}, "delta-nu");
  const double eta = pick(o.eta, cfg, {"eta"}, "eta");
  const double phi_c = pick(o.phi_c, cfg, {"phi_c"}, "phi-c");
  const bool flag_mu = o.mu.has_value(), flag_ps = o.phi_s.has_value();
  if (flag_mu && flag_ps)
    throw ValidationError("give exactly one of --mu / --phi-s");
  if (flag_mu) return OpoParams::from_mu(dnu, eta, *o.mu, phi_c);
  if (flag_ps) return OpoParams::from_squeezed_flux(dnu, eta, *o.phi_s, phi_c);
  const bool cfg_mu = cfg.contains("mu"), cfg_ps = cfg.contains("phi_s");
  if (cfg_mu == cfg_ps)
    throw ValidationError("give exactly one of mu / phi_s (flag or config)");
  if (cfg_mu) return OpoParams::from_mu(dnu, eta, cfg.at("mu").get<double>(), phi_c);
  return OpoParams::from_squeezed_flux(dnu, eta, cfg.at("phi_s").get<double>(), phi_c);
}

QuadConfig quad_from(const CommonOpts& o, const nlohmann::json& cfg) {
  QuadConfig q;
  if (cfg.contains("quad")) {
    const auto& qc = cfg.at("quad");
    q.rel_tol = qc.value("rel_tol", q.rel_tol);
    q.abs_tol = qc.value("abs_tol", q.abs_tol);
    q.omega_cutoff_factor = qc.value("omega_cutoff_factor", q.omega_cutoff_factor);
    q.tau_cutoff_factor = qc.value("tau_cutoff_factor", q.tau_cutoff_factor);
    q.max_levels = qc.value("max_levels", q.max_levels);
  }
  if (o.quad_rel_tol) q.rel_tol = *o.quad_rel_tol;
  return q;
}

VvvvVariant variant_from(const CommonOpts& o, const nlohmann::json& cfg) {
  if (o.variant) return vvvv_variant_from_string(*o.variant);
  if (cfg.contains("vvvv_variant"))
    return vvvv_variant_from_string(cfg.at("vvvv_variant").get<std::string>());
  return VvvvVariant::gaussian;
}

// Interpreted-values echo goes to stderr when data goes to stdout, so the
// data stream stays machine-readable.
std::ostream& echo_stream(const CommonOpts& o) {
  return o.out.empty() ? std::cerr : std::cout;
}

void echo_params(std::ostream& os, const char* cmd, const OpoParams& p) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# polsq %s\n"
                "#   delta_nu = %.9g Hz\n"
                "#   eta      = %.9g\n"
                "#   mu       = %.9g (phi_s = %.9g photons/s)\n"
                "#   phi_c    = %.9g photons/s\n",
                cmd, p.delta_nu, p.eta, p.mu, p.phi_s(), p.phi_c);
  os << buf;
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file '" + o.out + "'");
  f << text;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// -- point --------------------------------------------------------------------

std::string point_csv(const PointReport& r) {
  std::ostringstream os;
  os << "tau,odm_hhhh,odm_hvhv,odm_vhvh,odm_vvvv,odm_hhvv_re,odm_hhvv_im,"
        "odm_hvvh_re,odm_hvvh_im,concurrence,s_max,delta_s,beta,w2,w2_err,"
        "r_ps,nc_violated,nc_ratio_hhvv,nc_ratio_hvvh,pt_min_eig\n";
  const auto& m = r.odm.matrix();
  const double vals[] = {r.tau,
                         m(0, 0).real(),
                         m(1, 1).real(),
                         m(2, 2).real(),
                         m(3, 3).real(),
                         m(0, 3).real(),
                         m(0, 3).imag(),
                         m(1, 2).real(),
                         m(1, 2).imag(),
                         r.ent.concurrence,
                         r.ent.s_max,
                         r.ent.delta_s,
                         r.flux.beta_fom,
                         r.flux.w2,
                         r.flux.integ_error,
                         r.flux.r_ps,
                         r.nonclassicality.any_violation ? 1.0 : 0.0,
                         r.nonclassicality.hhvv.ratio,
                         r.nonclassicality.hvvh.ratio,
                         r.nonclassicality.pt_min_eigenvalue};
  for (std::size_t i = 0; i < std::size(vals); ++i)
    os << (i ? "," : "") << fmt17(vals[i]);
  os << "\n";
  return os.str();
}

int run_point(const CommonOpts& o) {
  const auto cfg = load_config(o.config);
  const auto p = params_from(o, cfg);
  const double tau = pick(o.tau, cfg, {"tau"}, "tau");
  const double dtau = pick(o.delta_tau, cfg, {"delta_tau"}, "delta-tau", 1e-9);
  const auto quad = quad_from(o, cfg);
  const auto variant = variant_from(o, cfg);

  auto& es = echo_stream(o);
  echo_params(es, "point", p);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "#   tau      = %.9g s\n#   delta_tau= %.9g s\n"
                "#   vvvv     = %s, quad rel tol = %.3g\n",
                tau, dtau, to_string(variant), quad.rel_tol);
  es << buf;

  const auto rep = eval_point(p, tau, dtau, quad, variant);
  for (const auto& w : rep.warnings) es << "# warning: " << w << "\n";
  if (o.format == "csv")
    emit(o, point_csv(rep));
  else
    emit(o, point_report_to_json(rep, !o.no_timestamp).dump(2) + "\n");
  return kExitOk;
}

// -- sweep --------------------------------------------------------------------

int run_sweep_cmd(const CommonOpts& o) {
  if (o.config.empty())
    throw ValidationError("sweep requires --config with an axes specification");
  auto spec = sweep_spec_from_json(load_config(o.config));

  // flag overrides: fixed parameters, tolerances, workers, variant
  auto override_fixed = [&](SweepParam p, const std::optional<double>& v) {
    if (!v) return;
    for (const auto& a : spec.axes)
      if (a.param == p)
        throw ValidationError(std::string("cannot override axis parameter '") +
                              to_string(p) + "' with a flag");
    for (auto& [fp, fv] : spec.fixed)
      if (fp == p) {
        fv = *v;
        return;
      }
    spec.fixed.emplace_back(p, *v);
  };
  override_fixed(SweepParam::delta_nu, o.delta_nu);
  override_fixed(SweepParam::eta, o.eta);
  override_fixed(SweepParam::mu, o.mu);
  override_fixed(SweepParam::phi_s, o.phi_s);
  override_fixed(SweepParam::phi_c, o.phi_c);
  override_fixed(SweepParam::tau, o.tau);
  if (o.delta_tau) spec.delta_tau = *o.delta_tau;
  if (o.jobs) spec.jobs = *o.jobs;
  if (o.quad_rel_tol) spec.quad.rel_tol = *o.quad_rel_tol;
  if (o.variant) spec.variant = vvvv_variant_from_string(*o.variant);
  spec.validate();

  auto& es = echo_stream(o);
  es << "# polsq sweep\n";
  for (const auto& a : spec.axes) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "#   axis %s: %s [%.9g, %.9g] x %d\n",
                  to_string(a.param), a.scale == AxisScale::log ? "log" : "linear",
                  a.min, a.max, a.count);
    es << buf;
  }
  for (const auto& [p, v] : spec.fixed) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "#   fixed %s = %.9g\n", to_string(p), v);
    es << buf;
  }
  {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "#   delta_tau = %.9g s, vvvv = %s, jobs = %d, rel tol = %.3g\n",
                  spec.delta_tau, to_string(spec.variant), spec.jobs,
                  spec.quad.rel_tol);
    es << buf;
  }

  const auto res = run_sweep(spec, !o.no_timestamp);
  const bool csv = o.format.empty() ? true : o.format == "csv";
  emit(o, csv ? sweep_result_to_csv(res)
              : sweep_result_to_json(res).dump(2) + "\n");
  if (res.error_count) {
    std::cerr << "# " << res.error_count << " of " << res.rows.size()
              << " rows failed; see row_errors in the JSON format\n";
    return kExitPartialSweep;
  }
  return kExitOk;
}

// -- optimize -----------------------------------------------------------------

int run_optimize(const CommonOpts& o, const std::string& objective_flag,
                 const std::vector<std::string>& bound_flags) {
  const auto cfg = load_config(o.config);
  OptimizeSpec spec;
  if (!objective_flag.empty())
    spec.objective = objective_from_string(objective_flag);
  else if (cfg.contains("objective"))
    spec.objective = objective_from_string(cfg.at("objective").get<std::string>());
  else
    throw ValidationError("optimize requires --objective (or config key)");

  if (cfg.contains("bounds"))
    for (const auto& b : cfg.at("bounds")) {
      OptimizeBounds ob;
      ob.param = sweep_param_from_string(b.at("param").get<std::string>());
      ob.lo = b.at("min").get<double>();
      ob.hi = b.at("max").get<double>();
      const std::string sc = b.value("scale", ob.lo > 0.0 ? "log" : "linear");
      ob.scale = sc == "log" ? AxisScale::log : AxisScale::linear;
      spec.bounds.push_back(ob);
    }
  for (const auto& bf : bound_flags) {
    // --bound param=lo:hi
    const auto eq = bf.find('=');
    const auto colon = bf.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw ValidationError("bound '" + bf + "' must look like param=lo:hi");
    OptimizeBounds ob;
    ob.param = sweep_param_from_string(bf.substr(0, eq));
    ob.lo = std::stod(bf.substr(eq + 1, colon - eq - 1));
    ob.hi = std::stod(bf.substr(colon + 1));
    ob.scale = ob.lo > 0.0 ? AxisScale::log : AxisScale::linear;
    // a flag replaces a config bound on the same parameter
    std::erase_if(spec.bounds,
                  [&](const OptimizeBounds& x) { return x.param == ob.param; });
    spec.bounds.push_back(ob);
  }

  if (cfg.contains("fixed"))
    for (const auto& [k, v] : cfg.at("fixed").items())
      spec.fixed.emplace_back(sweep_param_from_string(k), v.get<double>());
  auto override_fixed = [&](SweepParam p, const std::optional<double>& v) {
    if (!v) return;
    for (auto& [fp, fv] : spec.fixed)
      if (fp == p) {
        fv = *v;
        return;
      }
    spec.fixed.emplace_back(p, *v);
  };
  override_fixed(SweepParam::delta_nu, o.delta_nu);
  override_fixed(SweepParam::eta, o.eta);
  override_fixed(SweepParam::mu, o.mu);
  override_fixed(SweepParam::phi_s, o.phi_s);
  override_fixed(SweepParam::phi_c, o.phi_c);
  override_fixed(SweepParam::tau, o.tau);
  if (o.delta_tau) spec.delta_tau = *o.delta_tau;
  else spec.delta_tau = cfg.value("delta_tau", spec.delta_tau);
  spec.quad = quad_from(o, cfg);
  if (o.variant) spec.variant = vvvv_variant_from_string(*o.variant);
  spec.grid_per_axis = cfg.value("grid_per_axis", spec.grid_per_axis);
  spec.validate();

  auto& es = echo_stream(o);
  es << "# polsq optimize: objective = " << to_string(spec.objective) << "\n";
  for (const auto& b : spec.bounds) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "#   bound %s in [%.9g, %.9g] (%s)\n",
                  to_string(b.param), b.lo, b.hi,
                  b.scale == AxisScale::log ? "log" : "linear");
    es << buf;
  }
  for (const auto& [p, v] : spec.fixed) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "#   fixed %s = %.9g\n", to_string(p), v);
    es << buf;
  }

  const auto res = find_optimum(spec);
  emit(o, optimize_result_to_json(res, spec, !o.no_timestamp).dump(2) + "\n");
  return kExitOk;
}

// -- dilution -----------------------------------------------------------------

int run_dilution(const CommonOpts& o, std::optional<double> phi_c_min,
                 std::optional<double> phi_c_max, std::optional<int> samples) {
  const auto cfg = load_config(o.config);
  const double dnu = pick(o.delta_nu, cfg, {"delta_nu", "delta_nu_hz"}, "delta-nu");
  const double eta = pick(o.eta, cfg, {"eta"}, "eta");
  const double phi_s = pick(o.phi_s, cfg, {"phi_s"}, "phi-s");
  const double lo = pick(phi_c_min, cfg, {"phi_c_min"}, "phi-c-min");
  const double hi = pick(phi_c_max, cfg, {"phi_c_max"}, "phi-c-max");
  const double dtau = pick(o.delta_tau, cfg, {"delta_tau"}, "delta-tau", 1e-9);
  const int n = samples ? *samples : cfg.value("samples", 24);
  const auto quad = quad_from(o, cfg);
  const auto variant = variant_from(o, cfg);

  auto& es = echo_stream(o);
  char buf[224];
  std::snprintf(buf, sizeof buf,
                "# polsq dilution\n#   phi_s = %.9g photons/s, phi_c in [%.9g, "
                "%.9g] x %d (log)\n#   delta_nu = %.9g Hz, eta = %.9g, "
                "delta_tau = %.9g s\n",
                phi_s, lo, hi, n, dnu, eta, dtau);
  es << buf;

  const auto rep = dilution_probe(phi_s, lo, hi, n, dtau, eta, dnu, quad, variant);
  emit(o, dilution_report_to_json(rep, !o.no_timestamp).dump(2) + "\n");
  return kExitOk;
}

// -- oracle-check -------------------------------------------------------------

int run_oracle_check(const CommonOpts& o, const std::string& taus_flag,
                     std::optional<double> rel_tol_flag) {
  const auto cfg = load_config(o.config);
  const auto p = params_from(o, cfg);
  const auto quad = quad_from(o, cfg);

  std::vector<double> taus;
  std::string taus_src = taus_flag;
  if (taus_src.empty() && cfg.contains("taus")) {
    for (const auto& t : cfg.at("taus")) taus.push_back(t.get<double>());
  } else {
    if (taus_src.empty()) taus_src = "0,1e-10,1e-9,1e-8,1e-7,3e-7";
    std::istringstream in(taus_src);
    std::string tok;
    while (std::getline(in, tok, ','))
      if (!tok.empty()) taus.push_back(std::stod(tok));
  }
  if (taus.empty()) throw ValidationError("oracle-check needs at least one tau");
  const double rel_tol =
      rel_tol_flag ? *rel_tol_flag : cfg.value("oracle_rel_tol", 1e-6);

  auto& es = echo_stream(o);
  echo_params(es, "oracle-check", p);
  es << "#   taus =";
  for (double t : taus) es << " " << t;
  char buf[96];
  std::snprintf(buf, sizeof buf, "\n#   rel tol = %.3g, quad rel tol = %.3g\n",
                rel_tol, quad.rel_tol);
  es << buf;

  const auto rep = oracle_check(p, taus, quad, rel_tol);
  auto j = oracle_report_to_json(rep);
  j["provenance"] = nlohmann::ordered_json{
      {"engine_version", std::string(kEngineVersion)},
      {"convention_ledger_hash", convention_ledger_hash()}};
  if (!o.no_timestamp) j["provenance"]["timestamp"] = make_provenance().timestamp;
  emit(o, j.dump(2) + "\n");
  return rep.asserted_elements_pass ? kExitOk : kExitAccuracy;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "polsq: two-photon polarization entanglement of a squeezed+coherent "
      "beam - closed forms, Gaussian-moment oracle, metrics, sweeps"};
  app.set_version_flag("--version", std::string(kEngineVersion));
  app.require_subcommand(1);

  CommonOpts point_o, sweep_o, opt_o, dil_o, orc_o;
  std::string objective;
  std::vector<std::string> bounds;
  std::optional<double> phi_c_min, phi_c_max;
  std::optional<int> samples;
  std::string taus;
  std::optional<double> oracle_rel_tol;

  auto* point = app.add_subcommand(
      "point", "evaluate one operating point (correlations, ODM, metrics)");
  add_common(point, point_o);

  auto* sweep = app.add_subcommand(
      "sweep", "grid sweep over 1-3 parameters; CSV or JSON rows");
  add_common(sweep, sweep_o);

  auto* optimize = app.add_subcommand(
      "optimize", "maximize concurrence, w2 or beta over bounded parameters");
  add_common(optimize, opt_o);
  optimize->add_option("--objective", objective, "concurrence|w2|beta")
      ->check(CLI::IsMember({"concurrence", "w2", "beta"}));
  optimize->add_option("--bound", bounds,
                       "free parameter box, e.g. --bound phi_c=1e5:1e8");

  auto* dilution = app.add_subcommand(
      "dilution", "beta vs phi_c at fixed phi_s (entanglement dilution probe)");
  add_common(dilution, dil_o);
  dilution->add_option("--phi-c-min", phi_c_min, "lowest coherent flux");
  dilution->add_option("--phi-c-max", phi_c_max, "highest coherent flux");
  dilution->add_option("--samples", samples, "number of log-spaced samples");

  auto* oracle = app.add_subcommand(
      "oracle-check",
      "closed forms vs the Gaussian-moment quadrature oracle; JSON report");
  add_common(oracle, orc_o);
  oracle->add_option("--taus", taus, "comma-separated delays [s]");
  oracle->add_option("--oracle-rel-tol", oracle_rel_tol,
                     "assertion threshold for the agreeing elements");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (point->parsed()) return run_point(point_o);
    if (sweep->parsed()) return run_sweep_cmd(sweep_o);
    if (optimize->parsed()) return run_optimize(opt_o, objective, bounds);
    if (dilution->parsed())
      return run_dilution(dil_o, phi_c_min, phi_c_max, samples);
    if (oracle->parsed()) return run_oracle_check(orc_o, taus, oracle_rel_tol);
  } catch (const ValidationError& e) {
    std::cerr << "error (validation): " << e.what() << "\n";
    return kExitValidation;
  } catch (const AccuracyError& e) {
    std::cerr << "error (accuracy): " << e.what() << "\n";
    return kExitAccuracy;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

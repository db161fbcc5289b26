#include "polsqueeze/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace polsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json provenance_to_json(const Provenance& p) {
  nlohmann::ordered_json j;
  j["engine_version"] = p.engine_version;
  j["convention_ledger_hash"] = p.convention_hash;
  if (!p.timestamp.empty()) j["timestamp"] = p.timestamp;
  return j;
}

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const AccuracyError& e) {
    throw AccuracyError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::delta_nu: return "delta_nu";
    case SweepParam::eta: return "eta";
    case SweepParam::mu: return "mu";
    case SweepParam::phi_s: return "phi_s";
    case SweepParam::phi_c: return "phi_c";
    case SweepParam::tau: return "tau";
  }
  return "?";
}

SweepParam sweep_param_from_string(std::string_view s) {
  for (auto p : {SweepParam::delta_nu, SweepParam::eta, SweepParam::mu,
                 SweepParam::phi_s, SweepParam::phi_c, SweepParam::tau})
    if (s == to_string(p)) return p;
  throw ValidationError("unknown sweep parameter '" + std::string(s) + "'");
}

const char* to_string(OutputField f) {
  switch (f) {
    case OutputField::odm_entries: return "odm_entries";
    case OutputField::concurrence: return "concurrence";
    case OutputField::s_max: return "s_max";
    case OutputField::beta: return "beta";
    case OutputField::w2: return "w2";
    case OutputField::r_ps: return "r_ps";
    case OutputField::nonclassicality: return "nonclassicality";
  }
  return "?";
}

OutputField output_field_from_string(std::string_view s) {
  for (auto f : {OutputField::odm_entries, OutputField::concurrence,
                 OutputField::s_max, OutputField::beta, OutputField::w2,
                 OutputField::r_ps, OutputField::nonclassicality})
    if (s == to_string(f)) return f;
  throw ValidationError("unknown output field '" + std::string(s) + "'");
}

const char* to_string(Objective o) {
  switch (o) {
    case Objective::concurrence: return "concurrence";
    case Objective::w2: return "w2";
    case Objective::beta: return "beta";
  }
  return "?";
}

Objective objective_from_string(std::string_view s) {
  for (auto o : {Objective::concurrence, Objective::w2, Objective::beta})
    if (s == to_string(o)) return o;
  throw ValidationError("unknown objective '" + std::string(s) + "'");
}

// -- spec validation ---------------------------------------------------------

namespace {

void check_param_coverage(const std::vector<SweepParam>& used) {
  auto count = [&](SweepParam p) {
    return std::count(used.begin(), used.end(), p);
  };
  for (auto p : {SweepParam::delta_nu, SweepParam::eta, SweepParam::phi_c,
                 SweepParam::tau})
    if (count(p) != 1)
      throw ValidationError(std::string("parameter '") + to_string(p) +
                            "' must appear exactly once (axis or fixed)");
  const auto n_mu = count(SweepParam::mu);
  const auto n_phis = count(SweepParam::phi_s);
  if (n_mu + n_phis != 1)
    throw ValidationError("exactly one of 'mu'/'phi_s' must appear (axis or fixed)");
}

struct ResolvedPoint {
  OpoParams params;
  double tau;
};

ResolvedPoint resolve_point(const std::map<SweepParam, double>& v) {
  const double dnu = v.at(SweepParam::delta_nu);
  const double eta = v.at(SweepParam::eta);
  const double phi_c = v.at(SweepParam::phi_c);
  OpoParams p = v.count(SweepParam::mu)
                    ? OpoParams::from_mu(dnu, eta, v.at(SweepParam::mu), phi_c)
                    : OpoParams::from_squeezed_flux(dnu, eta,
                                                    v.at(SweepParam::phi_s), phi_c);
  return {p, v.at(SweepParam::tau)};
}

double axis_value(const SweepAxis& a, int i) {
  if (i == a.count - 1) return a.max;
  if (i == 0) return a.min;
  const double t = static_cast<double>(i) / (a.count - 1);
  if (a.scale == AxisScale::log)
    return std::exp(std::log(a.min) + t * (std::log(a.max) - std::log(a.min)));
  return a.min + t * (a.max - a.min);
}

}  // namespace

void SweepSpec::validate() const {
  if (axes.empty() || axes.size() > 3)
    throw ValidationError("sweep needs 1-3 axes, got " + std::to_string(axes.size()));
  for (const auto& a : axes) {
    if (a.count < 2)
      throw ValidationError(std::string("axis '") + to_string(a.param) +
                            "' needs count >= 2");
    if (!(a.min < a.max))
      throw ValidationError(std::string("axis '") + to_string(a.param) +
                            "' needs min < max");
    if (a.scale == AxisScale::log && !(a.min > 0.0))
      throw ValidationError(std::string("log axis '") + to_string(a.param) +
                            "' needs min > 0");
  }
  if (outputs.empty()) throw ValidationError("sweep needs at least one output field");
  if (!(delta_tau >= 0.0)) throw ValidationError("delta_tau must be >= 0");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  quad.validate();

  std::vector<SweepParam> used;
  for (const auto& a : axes) used.push_back(a.param);
  for (const auto& [p, _] : fixed) used.push_back(p);
  check_param_coverage(used);
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  SweepSpec s;
  if (!j.is_object()) throw ValidationError("sweep spec must be a JSON object");
  if (!j.contains("axes")) throw ValidationError("sweep spec missing 'axes'");
  for (const auto& aj : j.at("axes")) {
    SweepAxis a;
    a.param = sweep_param_from_string(aj.at("param").get<std::string>());
    const std::string sc = aj.value("scale", "linear");
    if (sc == "linear") a.scale = AxisScale::linear;
    else if (sc == "log") a.scale = AxisScale::log;
    else throw ValidationError("axis scale must be 'linear' or 'log'");
    a.min = aj.at("min").get<double>();
    a.max = aj.at("max").get<double>();
    a.count = aj.at("count").get<int>();
    s.axes.push_back(a);
  }
  if (j.contains("fixed"))
    for (const auto& [k, v] : j.at("fixed").items())
      s.fixed.emplace_back(sweep_param_from_string(k), v.get<double>());
  std::sort(s.fixed.begin(), s.fixed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (j.contains("outputs"))
    for (const auto& o : j.at("outputs"))
      s.outputs.push_back(output_field_from_string(o.get<std::string>()));
  s.delta_tau = j.value("delta_tau", 1e-9);
  if (j.contains("vvvv_variant"))
    s.variant = vvvv_variant_from_string(j.at("vvvv_variant").get<std::string>());
  if (j.contains("quad")) {
    const auto& q = j.at("quad");
    s.quad.rel_tol = q.value("rel_tol", s.quad.rel_tol);
    s.quad.abs_tol = q.value("abs_tol", s.quad.abs_tol);
    s.quad.omega_cutoff_factor = q.value("omega_cutoff_factor", s.quad.omega_cutoff_factor);
    s.quad.tau_cutoff_factor = q.value("tau_cutoff_factor", s.quad.tau_cutoff_factor);
    s.quad.max_levels = q.value("max_levels", s.quad.max_levels);
  }
  s.jobs = j.value("jobs", 1);
  return s;
}

nlohmann::ordered_json sweep_spec_to_json(const SweepSpec& s) {
  nlohmann::ordered_json j;
  j["axes"] = nlohmann::ordered_json::array();
  for (const auto& a : s.axes) {
    nlohmann::ordered_json aj;
    aj["param"] = to_string(a.param);
    aj["scale"] = a.scale == AxisScale::log ? "log" : "linear";
    aj["min"] = a.min;
    aj["max"] = a.max;
    aj["count"] = a.count;
    j["axes"].push_back(std::move(aj));
  }
  nlohmann::ordered_json fixed;
  for (const auto& [p, v] : s.fixed) fixed[to_string(p)] = v;
  j["fixed"] = std::move(fixed);
  j["outputs"] = nlohmann::ordered_json::array();
  for (auto f : s.outputs) j["outputs"].push_back(to_string(f));
  j["delta_tau"] = s.delta_tau;
  j["vvvv_variant"] = to_string(s.variant);
  nlohmann::ordered_json q;
  q["rel_tol"] = s.quad.rel_tol;
  q["abs_tol"] = s.quad.abs_tol;
  q["omega_cutoff_factor"] = s.quad.omega_cutoff_factor;
  q["tau_cutoff_factor"] = s.quad.tau_cutoff_factor;
  q["max_levels"] = s.quad.max_levels;
  j["quad"] = std::move(q);
  j["jobs"] = s.jobs;
  return j;
}

std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> cols;
  for (const auto& a : spec.axes) cols.emplace_back(to_string(a.param));
  for (auto f : spec.outputs) {
    switch (f) {
      case OutputField::odm_entries:
        for (const char* c : {"odm_hhhh", "odm_hvhv", "odm_vhvh", "odm_vvvv",
                              "odm_hhvv_re", "odm_hhvv_im", "odm_hvvh_re",
                              "odm_hvvh_im"})
          cols.emplace_back(c);
        break;
      case OutputField::concurrence:
        cols.emplace_back("concurrence");
        break;
      case OutputField::s_max:
        cols.emplace_back("s_max");
        cols.emplace_back("delta_s");
        break;
      case OutputField::beta:
        cols.emplace_back("beta");
        break;
      case OutputField::w2:
        cols.emplace_back("w2");
        cols.emplace_back("w2_err");
        break;
      case OutputField::r_ps:
        cols.emplace_back("r_ps");
        break;
      case OutputField::nonclassicality:
        for (const char* c :
             {"nc_violated", "nc_ratio_hhvv", "nc_ratio_hvvh", "pt_min_eig"})
          cols.emplace_back(c);
        break;
    }
  }
  return cols;
}

namespace {

void eval_row(const SweepSpec& spec, const std::vector<double>& axis_vals,
              std::size_t n_cols, SweepRow& row) {
  row.values = axis_vals;
  try {
    std::map<SweepParam, double> v;
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
      v[spec.axes[k].param] = axis_vals[k];
    for (const auto& [p, val] : spec.fixed) v[p] = val;
    const auto [params, tau] = resolve_point(v);

    // shared intermediates, built once per row on first use
    std::optional<PairCorrelations> corr;
    std::optional<TwoPhotonODM> odm;
    std::optional<W2Result> w2;
    auto get_corr = [&]() -> const PairCorrelations& {
      if (!corr) corr = pair_correlations(tau, params, spec.variant);
      return *corr;
    };
    auto get_odm = [&]() -> const TwoPhotonODM& {
      if (!odm) odm = TwoPhotonODM::from_correlations(get_corr());
      return *odm;
    };
    auto get_w2 = [&]() -> const W2Result& {
      if (!w2) w2 = concurrence_flux(params, spec.quad, spec.variant);
      return *w2;
    };

    for (auto f : spec.outputs) {
      switch (f) {
        case OutputField::odm_entries: {
          const auto& m = get_odm().matrix();
          for (int d = 0; d < 4; ++d) row.values.push_back(m(d, d).real());
          row.values.push_back(m(0, 3).real());
          row.values.push_back(m(0, 3).imag());
          row.values.push_back(m(1, 2).real());
          row.values.push_back(m(1, 2).imag());
          break;
        }
        case OutputField::concurrence:
          row.values.push_back(concurrence(get_odm()).value());
          break;
        case OutputField::s_max: {
          const auto c = chsh_max(get_odm());
          row.values.push_back(c.s_max);
          row.values.push_back(c.delta_s);
          break;
        }
        case OutputField::beta:
          row.values.push_back(bell_fom(params, spec.delta_tau, spec.variant));
          break;
        case OutputField::w2:
          row.values.push_back(get_w2().value);
          row.values.push_back(get_w2().error);
          break;
        case OutputField::r_ps: {
          const double total = params.phi_s() + params.phi_c;
          row.values.push_back(total > 0.0 ? get_w2().value / total : kNaN);
          break;
        }
        case OutputField::nonclassicality: {
          const auto nc = nonclassicality_test(get_corr());
          row.values.push_back(nc.any_violation ? 1.0 : 0.0);
          row.values.push_back(nc.hhvv.ratio);
          row.values.push_back(nc.hvvh.ratio);
          row.values.push_back(nc.pt_min_eigenvalue);
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.values.resize(n_cols, kNaN);
  }
  row.values.resize(n_cols, kNaN);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, bool with_timestamp) {
  spec.validate();
  SweepResult res;
  res.spec = spec;
  res.columns = sweep_columns(spec);
  res.provenance = make_provenance(with_timestamp);

  std::size_t total = 1;
  for (const auto& a : spec.axes) total *= static_cast<std::size_t>(a.count);
  res.rows.resize(total);

  // row-major over axes as listed: first axis slowest
  std::vector<std::size_t> stride(spec.axes.size(), 1);
  for (std::size_t k = spec.axes.size(); k-- > 1;)
    stride[k - 1] = stride[k] * static_cast<std::size_t>(spec.axes[k].count);

  const std::size_t n_cols = res.columns.size();
  auto run_one = [&](std::size_t r) {
    std::vector<double> axis_vals(spec.axes.size());
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
      const int i = static_cast<int>((r / stride[k]) %
                                     static_cast<std::size_t>(spec.axes[k].count));
      axis_vals[k] = axis_value(spec.axes[k], i);
    }
    eval_row(spec, axis_vals, n_cols, res.rows[r]);
  };

  const int jobs = std::clamp(spec.jobs, 1, 256);
  if (jobs == 1 || total < 2) {
    for (std::size_t r = 0; r < total; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < total;) run_one(r);
      });
    for (auto& t : pool) t.join();
  }

  for (const auto& r : res.rows)
    if (!r.error.empty()) ++res.error_count;
  return res;
}

std::string sweep_result_to_csv(const SweepResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (i) out += ',';
    out += r.columns[i];
  }
  out += '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      if (i) out += ',';
      out += fmt17(row.values[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json sweep_result_to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["spec"] = sweep_spec_to_json(r.spec);
  j["provenance"] = provenance_to_json(r.provenance);
  j["columns"] = r.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) rows.push_back(row.values);
  j["rows"] = std::move(rows);
  nlohmann::ordered_json errs = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (!r.rows[i].error.empty()) errs[std::to_string(i)] = r.rows[i].error;
  j["row_errors"] = std::move(errs);
  j["error_count"] = r.error_count;
  return j;
}

// -- single point -------------------------------------------------------------

PointReport eval_point(const OpoParams& p, double tau, double delta_tau,
                       const QuadConfig& cfg, VvvvVariant variant) {
  stage("params", [&] { p.validate(); return 0; });
  auto corr = stage("correlations",
                    [&] { return pair_correlations(tau, p, variant); });
  auto odm = stage("odm", [&] { return TwoPhotonODM::from_correlations(corr); });
  auto ent = stage("entanglement", [&] { return entanglement_metrics(odm); });
  auto nc = stage("nonclassicality", [&] { return nonclassicality_test(corr); });
  auto flux = stage("metrics",
                    [&] { return flux_metrics(p, delta_tau, cfg, variant); });
  PointReport rep{p, tau, delta_tau, variant, corr, odm, ent, nc, flux, {}};
  if (!coincidence_window_ok(p, delta_tau))
    rep.warnings.push_back(
        "delta_tau * delta_nu > 0.1: coincidence window is not small against "
        "the coherence time; Phi_dtau ~ Tr[R(0)]*dtau is a poor approximation");
  return rep;
}

nlohmann::ordered_json point_report_to_json(const PointReport& r,
                                            bool with_timestamp) {
  nlohmann::ordered_json j;
  j["params"] = params_to_json(r.params);
  j["tau_s"] = r.tau;
  j["delta_tau_s"] = r.delta_tau;
  j["vvvv_variant"] = to_string(r.variant);
  nlohmann::ordered_json c;
  c["r_hhhh"] = r.corr.r_hhhh;
  c["r_hvhv"] = r.corr.r_hvhv;
  c["r_vhvh"] = r.corr.r_vhvh;
  c["r_hhvv"] = r.corr.r_hhvv;
  c["r_hvvh"] = r.corr.r_hvvh;
  c["r_vvvv"] = r.corr.r_vvvv;
  c["trace"] = r.corr.trace();
  j["correlations"] = std::move(c);
  j["odm"] = odm_to_json(r.odm);
  nlohmann::ordered_json e;
  e["concurrence"] = r.ent.concurrence;
  e["s_max"] = r.ent.s_max;
  e["delta_s"] = r.ent.delta_s;
  e["lambdas"] = r.ent.lambdas;
  j["entanglement"] = std::move(e);
  nlohmann::ordered_json nc;
  auto ineq = [](const InequalityCheck& c) {
    nlohmann::ordered_json x;
    x["lhs"] = c.lhs;
    x["rhs"] = c.rhs;
    x["violated"] = c.violated;
    x["ratio"] = c.ratio;
    return x;
  };
  nc["ineq_hhvv"] = ineq(r.nonclassicality.hhvv);
  nc["ineq_hvvh"] = ineq(r.nonclassicality.hvvh);
  nc["any_violation"] = r.nonclassicality.any_violation;
  nc["pt_min_eigenvalue"] = r.nonclassicality.pt_min_eigenvalue;
  nc["ppt_negative"] = r.nonclassicality.ppt_negative;
  j["nonclassicality"] = std::move(nc);
  j["metrics"] = metrics_to_json(r.flux, r.params);
  j["warnings"] = r.warnings;
  j["provenance"] = provenance_to_json(make_provenance(with_timestamp));
  return j;
}

// -- optimizer ----------------------------------------------------------------

void OptimizeSpec::validate() const {
  if (bounds.empty() || bounds.size() > 3)
    throw ValidationError("optimize needs 1-3 bounded parameters");
  for (const auto& b : bounds) {
    if (!(b.lo <= b.hi))
      throw ValidationError(std::string("bound on '") + to_string(b.param) +
                            "' needs lo <= hi");
    if (b.scale == AxisScale::log && !(b.lo > 0.0))
      throw ValidationError(std::string("log-scaled bound on '") +
                            to_string(b.param) + "' needs lo > 0");
  }
  if (grid_per_axis < 2) throw ValidationError("grid_per_axis must be >= 2");
  if (!(delta_tau >= 0.0)) throw ValidationError("delta_tau must be >= 0");
  quad.validate();
  std::vector<SweepParam> used;
  for (const auto& b : bounds) used.push_back(b.param);
  for (const auto& [p, _] : fixed) used.push_back(p);
  check_param_coverage(used);
}

namespace {

double objective_value(const OptimizeSpec& spec, const std::vector<double>& coords) {
  std::map<SweepParam, double> v;
  for (std::size_t k = 0; k < spec.bounds.size(); ++k)
    v[spec.bounds[k].param] = coords[k];
  for (const auto& [p, val] : spec.fixed) v[p] = val;
  const auto [params, tau] = resolve_point(v);
  switch (spec.objective) {
    case Objective::concurrence: {
      const auto corr = pair_correlations(tau, params, spec.variant);
      if (corr.trace() <= 0.0) return 0.0;
      return concurrence(TwoPhotonODM::from_correlations(corr)).value();
    }
    case Objective::w2:
      return concurrence_flux(params, spec.quad, spec.variant).value;
    case Objective::beta:
      return bell_fom(params, spec.delta_tau, spec.variant);
  }
  return 0.0;
}

struct Transform {
  // simplex works in t-space: log10 for log-scaled axes
  static double to_t(double x, AxisScale s) {
    return s == AxisScale::log ? std::log10(x) : x;
  }
  static double from_t(double t, AxisScale s) {
    return s == AxisScale::log ? std::pow(10.0, t) : t;
  }
};

}  // namespace

OptimizeResult find_optimum(const OptimizeSpec& spec) {
  spec.validate();
  OptimizeResult res;

  // coarse scan grid (degenerate bounds collapse to a single value)
  std::vector<std::vector<double>> grids;
  for (const auto& b : spec.bounds) {
    std::vector<double> g;
    if (b.lo == b.hi) {
      g.push_back(b.lo);
    } else {
      SweepAxis a{b.param, b.scale, b.lo, b.hi, spec.grid_per_axis};
      for (int i = 0; i < spec.grid_per_axis; ++i) g.push_back(axis_value(a, i));
    }
    grids.push_back(std::move(g));
  }

  std::size_t total = 1;
  for (const auto& g : grids) total *= g.size();

  std::vector<double> best_coords;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < total; ++r) {
    std::vector<double> coords(grids.size());
    std::size_t rem = r;
    for (std::size_t k = grids.size(); k-- > 0;) {
      coords[k] = grids[k][rem % grids[k].size()];
      rem /= grids[k].size();
    }
    ScanPoint pt;
    pt.coords = coords;
    ++res.evaluations;
    try {
      pt.value = objective_value(spec, coords);
    } catch (const std::exception&) {
      pt.failed = true;
      ++res.failures;
    }
    if (!pt.failed && pt.value > best) {
      best = pt.value;
      best_coords = coords;
    }
    res.scan_trace.push_back(std::move(pt));
  }
  if (res.failures * 2 > static_cast<int>(total))
    throw AccuracyError("find_optimum: objective failed at " +
                        std::to_string(res.failures) + " of " +
                        std::to_string(total) + " scan points");
  if (best_coords.empty())
    throw AccuracyError("find_optimum: no scan point evaluated successfully");

  // Nelder-Mead refinement over the non-degenerate dimensions, seeded from the
  // best grid cell with half-cell steps. Deterministic, no RNG.
  std::vector<std::size_t> free_dims;
  for (std::size_t k = 0; k < spec.bounds.size(); ++k)
    if (spec.bounds[k].lo < spec.bounds[k].hi) free_dims.push_back(k);

  if (!free_dims.empty()) {
    const auto clamp_full = [&](std::vector<double>& t) {
      for (std::size_t d = 0; d < free_dims.size(); ++d) {
        const auto& b = spec.bounds[free_dims[d]];
        t[d] = std::clamp(t[d], Transform::to_t(b.lo, b.scale),
                          Transform::to_t(b.hi, b.scale));
      }
    };
    auto eval_t = [&](const std::vector<double>& t) {
      std::vector<double> coords = best_coords;
      for (std::size_t d = 0; d < free_dims.size(); ++d) {
        const auto& b = spec.bounds[free_dims[d]];
        coords[free_dims[d]] = Transform::from_t(t[d], b.scale);
      }
      ++res.evaluations;
      try {
        return objective_value(spec, coords);
      } catch (const std::exception&) {
        ++res.failures;
        return -std::numeric_limits<double>::infinity();
      }
    };

    const std::size_t n = free_dims.size();
    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(n));
    std::vector<double> fvals(n + 1);
    for (std::size_t d = 0; d < n; ++d) {
      const auto& b = spec.bounds[free_dims[d]];
      simplex[0][d] = Transform::to_t(best_coords[free_dims[d]], b.scale);
    }
    for (std::size_t i = 1; i <= n; ++i) {
      simplex[i] = simplex[0];
      const auto& b = spec.bounds[free_dims[i - 1]];
      const double span = Transform::to_t(b.hi, b.scale) - Transform::to_t(b.lo, b.scale);
      const double step = 0.5 * span / (spec.grid_per_axis - 1);
      simplex[i][i - 1] += (simplex[i][i - 1] + step <= Transform::to_t(b.hi, b.scale))
                               ? step
                               : -step;
    }
    for (std::size_t i = 0; i <= n; ++i) fvals[i] = eval_t(simplex[i]);

    for (int iter = 0; iter < spec.max_refine_iters; ++iter) {
      // order: best first (maximization)
      std::vector<std::size_t> idx(n + 1);
      for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return fvals[a] > fvals[b]; });
      {
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (auto i : idx) {
          s2.push_back(simplex[i]);
          f2.push_back(fvals[i]);
        }
        simplex = std::move(s2);
        fvals = std::move(f2);
      }
      double diam = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t d = 0; d < n; ++d)
          diam = std::max(diam, std::abs(simplex[i][d] - simplex[0][d]));
      if (diam < 1e-10) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;

      auto blend = [&](double coef) {
        std::vector<double> t(n);
        for (std::size_t d = 0; d < n; ++d)
          t[d] = centroid[d] + coef * (centroid[d] - simplex[n][d]);
        clamp_full(t);
        return t;
      };

      const auto refl = blend(1.0);
      const double f_refl = eval_t(refl);
      if (f_refl > fvals[0]) {
        const auto expa = blend(2.0);
        const double f_expa = eval_t(expa);
        if (f_expa > f_refl) {
          simplex[n] = expa;
          fvals[n] = f_expa;
        } else {
          simplex[n] = refl;
          fvals[n] = f_refl;
        }
      } else if (f_refl > fvals[n - 1]) {
        simplex[n] = refl;
        fvals[n] = f_refl;
      } else {
        const auto contr = blend(-0.5);
        const double f_contr = eval_t(contr);
        if (f_contr > fvals[n]) {
          simplex[n] = contr;
          fvals[n] = f_contr;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t d = 0; d < n; ++d)
              simplex[i][d] = 0.5 * (simplex[i][d] + simplex[0][d]);
            fvals[i] = eval_t(simplex[i]);
          }
        }
      }
    }

    std::size_t win = 0;
    for (std::size_t i = 1; i <= n; ++i)
      if (fvals[i] > fvals[win]) win = i;
    if (fvals[win] > best) {
      best = fvals[win];
      for (std::size_t d = 0; d < n; ++d) {
        const auto& b = spec.bounds[free_dims[d]];
        best_coords[free_dims[d]] = Transform::from_t(simplex[win][d], b.scale);
      }
    }
  }

  res.best_value = best;
  for (std::size_t k = 0; k < spec.bounds.size(); ++k)
    res.best_point.emplace_back(spec.bounds[k].param, best_coords[k]);
  return res;
}

nlohmann::ordered_json optimize_result_to_json(const OptimizeResult& r,
                                               const OptimizeSpec& spec,
                                               bool with_timestamp) {
  nlohmann::ordered_json j;
  j["objective"] = to_string(spec.objective);
  nlohmann::ordered_json best;
  for (const auto& [p, v] : r.best_point) best[to_string(p)] = v;
  j["best_point"] = std::move(best);
  j["best_value"] = r.best_value;
  j["evaluations"] = r.evaluations;
  j["failures"] = r.failures;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& pt : r.scan_trace) {
    nlohmann::ordered_json tj;
    tj["coords"] = pt.coords;
    if (pt.failed)
      tj["failed"] = true;
    else
      tj["value"] = pt.value;
    trace.push_back(std::move(tj));
  }
  j["scan_trace"] = std::move(trace);
  j["provenance"] = provenance_to_json(make_provenance(with_timestamp));
  return j;
}

// -- dilution -----------------------------------------------------------------

DilutionReport dilution_probe(double phi_s, double phi_c_min, double phi_c_max,
                              int samples, double delta_tau, double eta,
                              double delta_nu, const QuadConfig& cfg,
                              VvvvVariant variant) {
  if (samples < 8) throw ValidationError("dilution probe needs >= 8 samples");
  if (!(phi_c_min > 0.0 && phi_c_min < phi_c_max))
    throw ValidationError("dilution probe needs 0 < phi_c_min < phi_c_max");
  (void)cfg;
  DilutionReport rep;
  rep.phi_s = phi_s;
  rep.delta_tau = delta_tau;

  SweepAxis axis{SweepParam::phi_c, AxisScale::log, phi_c_min, phi_c_max, samples};
  for (int i = 0; i < samples; ++i) {
    const double pc = axis_value(axis, i);
    const OpoParams p = OpoParams::from_squeezed_flux(delta_nu, eta, phi_s, pc);
    const auto corr = pair_correlations(0.0, p, variant);
    double ds = 0.0;
    if (corr.trace() > 0.0)
      ds = chsh_max(TwoPhotonODM::from_correlations(corr)).delta_s;
    const double rate = corr.trace() * delta_tau;
    rep.phi_c.push_back(pc);
    rep.delta_s.push_back(ds);
    rep.beta.push_back(ds > 0.0 ? ds * ds * rate : 0.0);
  }

  int run_begin = 0, best_begin = 0, best_end = 0;
  for (int i = 1; i < samples; ++i) {
    if (rep.beta[i] > rep.beta[i - 1]) {
      rep.increasing_range_found = true;
      if (i - run_begin > best_end - best_begin) {
        best_begin = run_begin;
        best_end = i;
      }
    } else {
      run_begin = i;
    }
  }
  rep.best_run_begin = best_begin;
  rep.best_run_end = best_end;

  const auto peak = std::max_element(rep.beta.begin(), rep.beta.end());
  rep.decreasing_tail = *peak > 0.0 && rep.beta.back() < *peak;
  return rep;
}

nlohmann::ordered_json dilution_report_to_json(const DilutionReport& r,
                                               bool with_timestamp) {
  nlohmann::ordered_json j;
  j["phi_s"] = r.phi_s;
  j["delta_tau_s"] = r.delta_tau;
  j["phi_c"] = r.phi_c;
  j["beta"] = r.beta;
  j["delta_s"] = r.delta_s;
  j["increasing_range_found"] = r.increasing_range_found;
  j["best_run_begin"] = r.best_run_begin;
  j["best_run_end"] = r.best_run_end;
  j["decreasing_tail"] = r.decreasing_tail;
  j["provenance"] = provenance_to_json(make_provenance(with_timestamp));
  return j;
}

}  // namespace polsq

#include "polsqueeze/sweep.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"

using namespace polsq;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.axes.push_back({SweepParam::phi_c, AxisScale::log, 1e5, 1e7, 3});
  s.axes.push_back({SweepParam::phi_s, AxisScale::log, 1e3, 1e5, 2});
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::tau, 1e-9}};
  s.outputs = {OutputField::concurrence, OutputField::s_max};
  return s;
}

}  // namespace

TEST_CASE("sweep spec validation") {
  SweepSpec s = small_spec();
  CHECK_NOTHROW(s.validate());

  SweepSpec no_axes = s;
  no_axes.axes.clear();
  CHECK_THROWS_AS(no_axes.validate(), ValidationError);

  SweepSpec one_point = s;
  one_point.axes[0].count = 1;
  CHECK_THROWS_AS(one_point.validate(), ValidationError);

  SweepSpec inverted = s;
  inverted.axes[0].min = 1e8;
  CHECK_THROWS_AS(inverted.validate(), ValidationError);

  SweepSpec log_zero = s;
  log_zero.axes[0].min = 0.0;
  CHECK_THROWS_AS(log_zero.validate(), ValidationError);

  SweepSpec dup = s;
  dup.fixed.emplace_back(SweepParam::phi_c, 1e6);  // phi_c already an axis
  CHECK_THROWS_AS(dup.validate(), ValidationError);

  SweepSpec both_mu_phis = s;
  both_mu_phis.fixed.emplace_back(SweepParam::mu, 0.1);
  CHECK_THROWS_AS(both_mu_phis.validate(), ValidationError);

  SweepSpec missing_tau = s;
  missing_tau.fixed = {{SweepParam::delta_nu, 8e6}, {SweepParam::eta, 0.93}};
  CHECK_THROWS_AS(missing_tau.validate(), ValidationError);

  SweepSpec no_outputs = s;
  no_outputs.outputs.clear();
  CHECK_THROWS_AS(no_outputs.validate(), ValidationError);
}

TEST_CASE("sweep spec json round trip") {
  const auto j = sweep_spec_to_json(small_spec());
  const auto back = sweep_spec_from_json(j);
  CHECK(back.axes.size() == 2);
  CHECK(back.axes[0].param == SweepParam::phi_c);
  CHECK(back.axes[0].scale == AxisScale::log);
  CHECK(back.axes[0].count == 3);
  CHECK(back.fixed.size() == 3);
  CHECK(back.outputs.size() == 2);
  CHECK(sweep_spec_to_json(back) == j);
}

TEST_CASE("run_sweep: row-major order, degenerate axis, endpoint exactness") {
  SweepSpec s = small_spec();
  const auto r = run_sweep(s, false);
  CHECK(r.rows.size() == 6);
  CHECK(r.error_count == 0);
  CHECK(r.columns == std::vector<std::string>{"phi_c", "phi_s", "concurrence",
                                              "s_max", "delta_s"});
  // first axis slowest; endpoints exact
  CHECK(r.rows[0].values[0] == 1e5);
  CHECK(r.rows[0].values[1] == 1e3);
  CHECK(r.rows[1].values[0] == 1e5);
  CHECK(r.rows[1].values[1] == 1e5);
  CHECK(r.rows[5].values[0] == 1e7);
  CHECK(r.rows[5].values[1] == 1e5);
  for (const auto& row : r.rows) {
    CHECK(row.error.empty());
    CHECK(std::isfinite(row.values[2]));
  }
}

TEST_CASE("run_sweep equals eval_point at the same coordinates") {
  SweepSpec s = small_spec();
  s.outputs = {OutputField::concurrence, OutputField::beta, OutputField::w2};
  const auto r = run_sweep(s, false);
  const std::size_t row = 3;  // phi_c index 1, phi_s index 1
  const double phi_c = r.rows[row].values[0];
  const double phi_s = r.rows[row].values[1];
  const auto p = OpoParams::from_squeezed_flux(8e6, 0.93, phi_s, phi_c);
  const auto rep = eval_point(p, 1e-9, s.delta_tau);
  CHECK(r.rows[row].values[2] == rep.ent.concurrence);
  CHECK(r.rows[row].values[3] == rep.flux.beta_fom);
  CHECK(r.rows[row].values[4] == rep.flux.w2);
}

TEST_CASE("run_sweep: tau axis gives non-increasing concurrence in |tau|") {
  SweepSpec s;
  s.axes.push_back({SweepParam::tau, AxisScale::linear, 0.0, 4e-7, 12});
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::phi_s, 2e5},
             {SweepParam::phi_c, 2e6}};
  s.outputs = {OutputField::concurrence};
  const auto r = run_sweep(s, false);
  REQUIRE(r.rows.size() == 12);
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    CHECK(r.rows[i].values[1] <= r.rows[i - 1].values[1] + 1e-12);
}

TEST_CASE("run_sweep: identical results for any worker-pool size") {
  SweepSpec s = small_spec();
  s.outputs = {OutputField::concurrence, OutputField::w2,
               OutputField::nonclassicality};
  s.jobs = 1;
  const auto a = run_sweep(s, false);
  s.jobs = 4;
  const auto b = run_sweep(s, false);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t k = 0; k < a.rows[i].values.size(); ++k) {
      const double x = a.rows[i].values[k], y = b.rows[i].values[k];
      CHECK(std::memcmp(&x, &y, sizeof x) == 0);
    }
}

TEST_CASE("run_sweep: per-row errors are captured inline, not dropped") {
  SweepSpec s;
  s.axes.push_back({SweepParam::phi_c, AxisScale::linear, 0.0, 1e6, 2});
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::phi_s, 0.0},  // with phi_c = 0 the trace is zero
             {SweepParam::tau, 0.0}};
  s.outputs = {OutputField::concurrence};
  const auto r = run_sweep(s, false);
  CHECK(r.rows.size() == 2);
  CHECK(r.error_count == 1);
  CHECK_FALSE(r.rows[0].error.empty());
  CHECK(std::isnan(r.rows[0].values[1]));
  CHECK(r.rows[1].error.empty());
  CHECK(r.rows[1].values[1] == 0.0);

  const auto j = sweep_result_to_json(r);
  CHECK(j.at("error_count") == 1);
  CHECK(j.at("row_errors").contains("0"));
}

TEST_CASE("csv writer: schema, LF endings, 17-digit round trip") {
  SweepSpec s = small_spec();
  const auto r = run_sweep(s, false);
  const std::string csv = sweep_result_to_csv(r);
  CHECK(csv.find('\r') == std::string::npos);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "phi_c,phi_s,concurrence,s_max,delta_s");
  std::size_t nrows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++nrows;
    // every cell round-trips bitwise through the 17-digit format
    std::istringstream cells(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(cells, cell, ',')) {
      const double parsed = std::strtod(cell.c_str(), nullptr);
      const double orig = r.rows[nrows - 1].values[col++];
      CHECK(std::memcmp(&parsed, &orig, sizeof parsed) == 0);
    }
    CHECK(col == r.columns.size());
  }
  CHECK(nrows == r.rows.size());
}

TEST_CASE("eval_point report content and warnings") {
  const auto p = OpoParams::from_squeezed_flux(8e6, 0.93, 2e5, 2e6);
  const auto rep = eval_point(p, 1e-9, 1e-9);
  CHECK(rep.ent.concurrence == doctest::Approx(0.6432).epsilon(2e-3));
  CHECK(rep.nonclassicality.any_violation);
  CHECK(rep.flux.w2 > 0.0);
  CHECK(rep.warnings.empty());

  const auto wide = eval_point(p, 1e-9, 1e-6);
  REQUIRE(wide.warnings.size() == 1);

  const auto j = point_report_to_json(rep, false);
  CHECK(j.at("entanglement").at("concurrence") == rep.ent.concurrence);
  CHECK(j.at("odm").at("basis")[0] == "HH");
  CHECK_FALSE(j.at("provenance").contains("timestamp"));
  CHECK(j.at("provenance").contains("convention_ledger_hash"));
}

TEST_CASE("eval_point names the failing stage") {
  const auto p = OpoParams::from_mu(8e6, 0.93, 0.0, 0.0);  // zero total flux
  try {
    eval_point(p, 0.0, 1e-9);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("odm:") != std::string::npos);
  }
}

TEST_CASE("find_optimum: degenerate bounds return the fixed point") {
  OptimizeSpec s;
  s.objective = Objective::concurrence;
  s.bounds = {{SweepParam::phi_c, 2e6, 2e6, AxisScale::log},
              {SweepParam::phi_s, 2e5, 2e5, AxisScale::log}};
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::tau, 1e-9}};
  const auto r = find_optimum(s);
  CHECK(r.best_point[0].second == 2e6);
  CHECK(r.best_point[1].second == 2e5);
  CHECK(r.best_value == doctest::Approx(0.6432).epsilon(2e-3));
  CHECK(r.scan_trace.size() == 1);
}

TEST_CASE("find_optimum: concurrence peak is Bell-like") {
  OptimizeSpec s;
  s.objective = Objective::concurrence;
  s.bounds = {{SweepParam::phi_c, 1e5, 1e8, AxisScale::log},
              {SweepParam::phi_s, 1e3, 1e6, AxisScale::log}};
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::tau, 1e-9}};
  s.grid_per_axis = 10;
  const auto r = find_optimum(s);
  CHECK(r.best_value >= 0.9);
  // the optimum balances the HH and VV populations
  std::map<SweepParam, double> best(r.best_point.begin(), r.best_point.end());
  const auto p = OpoParams::from_squeezed_flux(8e6, 0.93, best[SweepParam::phi_s],
                                               best[SweepParam::phi_c]);
  const auto odm = TwoPhotonODM::from_correlations(pair_correlations(1e-9, p));
  CHECK(std::abs(odm.matrix()(0, 0).real() - odm.matrix()(3, 3).real()) < 0.1);
  CHECK(r.evaluations > 100);
  CHECK(r.failures == 0);
}

TEST_CASE("find_optimum: beta prefers bright, modestly entangled states") {
  OptimizeSpec s;
  s.objective = Objective::beta;
  s.bounds = {{SweepParam::phi_c, 1e5, 1e8, AxisScale::log},
              {SweepParam::phi_s, 1e3, 1e6, AxisScale::log}};
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::tau, 0.0}};
  s.grid_per_axis = 10;
  const auto r = find_optimum(s);
  CHECK(r.best_value > 0.0);
  std::map<SweepParam, double> best(r.best_point.begin(), r.best_point.end());
  const auto p = OpoParams::from_squeezed_flux(8e6, 0.93, best[SweepParam::phi_s],
                                               best[SweepParam::phi_c]);
  const double c =
      concurrence(TwoPhotonODM::from_correlations(pair_correlations(0.0, p)))
          .value();
  CHECK(c > 0.35);
  CHECK(c < 0.85);
}

TEST_CASE("dilution probe") {
  const auto flat = dilution_probe(0.0, 1e5, 1e9, 10, 1e-9, 0.93, 8e6);
  CHECK_FALSE(flat.increasing_range_found);
  for (double b : flat.beta) CHECK(b == 0.0);

  const auto rep = dilution_probe(2e5, 1e5, 1e9, 24, 1e-9, 0.93, 8e6);
  CHECK(rep.increasing_range_found);
  CHECK(rep.best_run_end > rep.best_run_begin);
  CHECK(rep.beta[rep.best_run_end] > rep.beta[rep.best_run_begin]);
  CHECK(rep.decreasing_tail);

  CHECK_THROWS_AS(dilution_probe(2e5, 1e5, 1e9, 4, 1e-9, 0.93, 8e6),
                  ValidationError);
  CHECK_THROWS_AS(dilution_probe(2e5, 1e9, 1e5, 24, 1e-9, 0.93, 8e6),
                  ValidationError);

  const auto j = dilution_report_to_json(rep, false);
  CHECK(j.at("increasing_range_found").get<bool>());
  CHECK(j.at("phi_c").size() == 24);
}

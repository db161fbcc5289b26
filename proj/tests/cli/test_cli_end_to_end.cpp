// Drives the installed CLI binary end to end: exit codes, output formats,
// determinism, config/flag precedence.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

const std::string kCli = POLSQ_CLI_PATH;
const std::string kTmp = POLSQ_TEST_TMPDIR;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const std::string out_file = kTmp + "/stdout.txt";
  const std::string cmd = kCli + " " + args + " > " + out_file + " 2> " + kTmp +
                          "/stderr.txt";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out_file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const std::string kTypicalFlags =
    "--delta-nu 8e6 --eta 0.93 --phi-s 2e5 --phi-c 2e6";

}  // namespace

TEST_CASE("point: json report with the expected physics") {
  const auto r = run("point " + kTypicalFlags + " --tau 1e-9 --delta-tau 1e-9");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("entanglement").at("concurrence").get<double>() ==
        doctest::Approx(0.6432).epsilon(2e-3));
  CHECK(j.at("odm").at("re")[0][0].get<double>() ==
        doctest::Approx(0.6265).epsilon(2e-3));
  CHECK(j.at("nonclassicality").at("any_violation").get<bool>());
  CHECK(j.at("metrics").at("w2_ebit_per_s").get<double>() ==
        doctest::Approx(6.993e5).epsilon(1e-2));
  CHECK(j.at("params").at("mu").get<double>() ==
        doctest::Approx(0.161796).epsilon(1e-4));
  CHECK(j.at("provenance").contains("convention_ledger_hash"));
}

TEST_CASE("point: csv format emits one header and one numeric row") {
  const auto r = run("point " + kTypicalFlags +
                     " --tau 1e-9 --delta-tau 1e-9 --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.stdout_text);
  std::string header, row, extra;
  CHECK(std::getline(in, header));
  CHECK(std::getline(in, row));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(header.substr(0, 9) == "tau,odm_h");
  CHECK(row.find("nan") == std::string::npos);
}

TEST_CASE("point: validation failures exit with code 2") {
  CHECK(run("point --delta-nu 8e6 --eta 2.0 --phi-s 2e5 --phi-c 2e6 --tau 0")
            .exit_code == 2);
  // both mu and phi_s
  CHECK(run("point --delta-nu 8e6 --eta 0.93 --mu 0.1 --phi-s 2e5 --phi-c 2e6 "
            "--tau 0")
            .exit_code == 2);
  // missing tau
  CHECK(run("point " + kTypicalFlags).exit_code == 2);
  // unknown flag (CLI parse error)
  CHECK(run("point --no-such-flag 1").exit_code == 2);
}

TEST_CASE("sweep: csv schema, determinism, flag-over-config precedence") {
  const std::string cfg = kTmp + "/sweep.json";
  write_file(cfg, R"({
    "axes": [
      {"param": "phi_c", "scale": "log", "min": 1e5, "max": 1e7, "count": 3},
      {"param": "tau", "scale": "linear", "min": 0.0, "max": 2e-7, "count": 4}
    ],
    "fixed": {"delta_nu": 8e6, "eta": 0.5, "phi_s": 2e5},
    "outputs": ["concurrence", "nonclassicality"],
    "jobs": 2
  })");

  const std::string out1 = kTmp + "/sweep1.csv";
  const std::string out2 = kTmp + "/sweep2.csv";
  const auto r1 = run("sweep --config " + cfg + " --eta 0.93 --out " + out1);
  REQUIRE(r1.exit_code == 0);
  const auto r2 = run("sweep --config " + cfg + " --eta 0.93 --jobs 4 --out " + out2);
  REQUIRE(r2.exit_code == 0);

  const std::string csv1 = slurp(out1);
  CHECK(csv1 == slurp(out2));  // byte-identical across reruns and job counts
  std::istringstream in(csv1);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "phi_c,tau,concurrence,nc_violated,nc_ratio_hhvv,nc_ratio_hvvh,"
        "pt_min_eig");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 12);
  CHECK(csv1.find('\r') == std::string::npos);

  // row 0 is phi_c=1e5, tau=0 with eta overridden to 0.93: concurrence matches
  // the library value for those coordinates
  std::istringstream in2(csv1);
  std::string line0;
  std::getline(in2, line0);
  std::getline(in2, line0);
  CHECK(line0.substr(0, 7) == "100000,");
}

TEST_CASE("sweep: json format carries spec echo and provenance") {
  const std::string cfg = kTmp + "/sweep_small.json";
  write_file(cfg, R"({
    "axes": [{"param": "phi_s", "scale": "log", "min": 1e3, "max": 1e5, "count": 2}],
    "fixed": {"delta_nu": 8e6, "eta": 0.93, "phi_c": 2e6, "tau": 1e-9},
    "outputs": ["concurrence", "w2"]
  })");
  const auto r = run("sweep --config " + cfg + " --format json --no-timestamp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("spec").at("axes").size() == 1);
  CHECK(j.at("columns") ==
        nlohmann::json({"phi_s", "concurrence", "w2", "w2_err"}));
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("error_count") == 0);
  CHECK_FALSE(j.at("provenance").contains("timestamp"));

  const auto r2 = run("sweep --config " + cfg + " --format json --no-timestamp");
  CHECK(r.stdout_text == r2.stdout_text);
}

TEST_CASE("sweep: partial failure exits 4 and keeps all rows") {
  const std::string cfg = kTmp + "/sweep_partial.json";
  write_file(cfg, R"({
    "axes": [{"param": "phi_c", "scale": "linear", "min": 0.0, "max": 1e6, "count": 2}],
    "fixed": {"delta_nu": 8e6, "eta": 0.93, "phi_s": 0.0, "tau": 0.0},
    "outputs": ["concurrence"]
  })");
  const auto r = run("sweep --config " + cfg + " --format json --no-timestamp");
  CHECK(r.exit_code == 4);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("error_count") == 1);
  CHECK(j.at("row_errors").contains("0"));
}

TEST_CASE("sweep: invalid spec exits 2 before evaluation") {
  const std::string cfg = kTmp + "/sweep_bad.json";
  write_file(cfg, R"({
    "axes": [{"param": "phi_c", "scale": "log", "min": 0.0, "max": 1e6, "count": 2}],
    "fixed": {"delta_nu": 8e6, "eta": 0.93, "phi_s": 2e5, "tau": 0.0},
    "outputs": ["concurrence"]
  })");
  CHECK(run("sweep --config " + cfg).exit_code == 2);
  CHECK(run("sweep").exit_code == 2);  // no config at all
}

TEST_CASE("optimize: degenerate bounds return the point itself") {
  const auto r = run("optimize --objective concurrence "
                     "--bound phi_c=2e6:2e6 --bound phi_s=2e5:2e5 "
                     "--delta-nu 8e6 --eta 0.93 --tau 1e-9 --no-timestamp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("best_point").at("phi_c").get<double>() == 2e6);
  CHECK(j.at("best_value").get<double>() == doctest::Approx(0.6432).epsilon(2e-3));
}

TEST_CASE("optimize: beta maximization lands on a bright, modestly entangled state") {
  const auto r = run("optimize --objective beta "
                     "--bound phi_c=1e5:1e8 --bound phi_s=1e3:1e6 "
                     "--delta-nu 8e6 --eta 0.93 --tau 0 --delta-tau 1e-9 "
                     "--no-timestamp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("best_value").get<double>() > 0.0);
  CHECK(j.at("scan_trace").size() > 100);
}

TEST_CASE("dilution: finds the increasing range at the reference phi_s") {
  const auto r = run("dilution --phi-s 2e5 --phi-c-min 1e5 --phi-c-max 1e9 "
                     "--samples 24 --delta-nu 8e6 --eta 0.93 --delta-tau 1e-9 "
                     "--no-timestamp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("increasing_range_found").get<bool>());
  CHECK(j.at("phi_c").size() == 24);
  CHECK(j.at("beta").size() == 24);
}

TEST_CASE("oracle-check: asserted elements pass and both vvvv variants appear") {
  const auto r = run("oracle-check " + kTypicalFlags +
                     " --taus 0,1e-9,1e-7 --no-timestamp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j.at("asserted_elements_pass").get<bool>());
  CHECK(j.at("asserted_elements").at("r_hhvv").size() == 3);
  for (const auto& row : j.at("asserted_elements").at("r_hhvv")) {
    CHECK(row.at("pass").get<bool>());
    CHECK(row.at("rel_dev").get<double>() <= 1e-6);
  }
  // the discrepancy surfaces: printed form deviates, gaussian tracks
  const auto& printed = j.at("r_vvvv_comparison").at("printed");
  const auto& gauss = j.at("r_vvvv_comparison").at("gaussian");
  CHECK(printed[1].at("rel_dev").get<double>() > 1e-3);
  CHECK(gauss[1].at("rel_dev").get<double>() < 1e-6);
}

TEST_CASE("config file + flag override for point") {
  const std::string cfg = kTmp + "/point.json";
  write_file(cfg, R"({"delta_nu": 8e6, "eta": 0.5, "phi_s": 2e5,
                      "phi_c": 2e6, "tau": 1e-9, "delta_tau": 1e-9})");
  const auto base = run("point --config " + cfg);
  REQUIRE(base.exit_code == 0);
  CHECK(nlohmann::json::parse(base.stdout_text).at("params").at("eta") == 0.5);

  const auto over = run("point --config " + cfg + " --eta 0.93");
  REQUIRE(over.exit_code == 0);
  CHECK(nlohmann::json::parse(over.stdout_text).at("params").at("eta") == 0.93);
}

TEST_CASE("vvvv variant flag switches the pipeline") {
  const auto g = run("point " + kTypicalFlags + " --tau 1e-9 --delta-tau 1e-9");
  const auto pr = run("point " + kTypicalFlags +
                      " --tau 1e-9 --delta-tau 1e-9 --vvvv-variant printed");
  REQUIRE(g.exit_code == 0);
  REQUIRE(pr.exit_code == 0);
  const double vg = nlohmann::json::parse(g.stdout_text)
                        .at("correlations").at("r_vvvv").get<double>();
  const double vp = nlohmann::json::parse(pr.stdout_text)
                        .at("correlations").at("r_vvvv").get<double>();
  CHECK(vg > vp);
  CHECK(nlohmann::json::parse(pr.stdout_text).at("vvvv_variant") == "printed");
}

TEST_CASE("version flag") {
  const auto r = run("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("0.1.0") != std::string::npos);
}

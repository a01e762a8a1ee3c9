#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catid/cli.hpp"
#include "catid/json_io.hpp"
#include "fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace catid;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
  json parsed() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() /
             ("catid_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_file(const std::string &name, const std::string &text) {
  const auto path = (scratch() / name).string();
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string write_population(const std::string &name, const DgpSpec &spec) {
  std::ostringstream os;
  save_dataset(population_dataset(spec), os);
  return write_file(name, os.str());
}

std::string data(const std::string &name) {
  return std::string(CATID_TEST_DATA_DIR) + "/" + name;
}

} // namespace

TEST_CASE("missing input exits 2 without json") {
  const auto r = run({"estimate", "--input", "/nonexistent/file.csv"});
  CHECK(r.code == kExitValidation);
  CHECK(r.out.empty());
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"estimate"}).code == kExitValidation);
  CHECK(run({"frobnicate"}).code == kExitValidation);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"--version"}).code == kExitOk);
  const auto pop = write_population("a.csv", fixtures::dgp_a());
  CHECK(run({"bounds", "-i", pop, "--assumption", "similarity"}).code ==
        kExitValidation);
  CHECK(run({"bounds", "-i", pop, "--assumption", "bounded"}).code ==
        kExitValidation);
  const auto r = run({"estimate", "-i", pop, "--bootstrap", "10"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("--seed") != std::string::npos);
}

TEST_CASE("validation and weak instrument exit codes") {
  const auto bad = write_file("bad.csv", "y,d,z\na,1,1\nb,3,0\n");
  CHECK(run({"moments", "-i", bad}).code == kExitValidation);
  const auto flat = write_file("flat.csv", "y,d,z\na,1,1\nb,0,1\n");
  CHECK(run({"moments", "-i", flat}).code == kExitValidation);
  const auto weak =
      write_file("weak.csv", "y,d,z\na,1,0\nb,0,0\na,1,1\nb,0,1\n");
  const auto r = run({"estimate", "-i", weak});
  CHECK(r.code == kExitWeakInstrument);
  CHECK(r.out.empty());
  CHECK(run({"bounds", "-i", weak, "--assumption", "none"}).code == kExitOk);
}

TEST_CASE("moments output") {
  const auto pop = write_population("a.csv", fixtures::dgp_a());
  const auto r = run({"moments", "-i", pop, "--no-timestamp"});
  REQUIRE(r.code == 0);
  const auto j = r.parsed();
  CHECK(j["p"][0].get<double>() == doctest::Approx(0.2));
  CHECK(j["mu"][0][1].get<double>() == doctest::Approx(0.38));
  CHECK(j["manifest"]["subcommand"] == "moments");
  CHECK(j["manifest"]["input_digest"] == "sha256:" + sha256_file(pop));
  CHECK(j["manifest"]["timestamp"].is_null());
  CHECK(j["manifest"]["version"] == kVersion);
}

TEST_CASE("estimate on a large sample") {
  const auto csv = (scratch() / "a_sample.csv").string();
  REQUIRE(run({"simulate", "--spec", data("dgp_a.json"), "--n", "100000",
               "--seed", "7", "--out", csv})
              .code == 0);
  const auto r = run({"estimate", "-i", csv, "--categories", "c1,c2,c3"});
  REQUIRE(r.code == 0);
  const auto j = r.parsed();
  CHECK(std::abs(j["pi1"][0].get<double>() - 0.5) < 0.02);
  CHECK(j["categories"][0] == "c1");
  CHECK(j["testable_ok"]["d1"] == true);
  CHECK(j.contains("effects"));
  CHECK(j["residuals"]["plug_back"].get<double>() < 1e-10);
  CHECK(j["manifest"]["swapped_z"] == false);
  CHECK(j["manifest"]["timestamp"].is_string());
}

TEST_CASE("calibrated binary population reproduces the risk difference") {
  const auto t1 = write_population("t1.csv", fixtures::binary_calibrated(0.9239, 0.8696));
  const auto j1 = run({"estimate", "-i", t1, "--baseline", "bad"}).parsed();
  CHECK(j1["categories"][0] == "good");
  CHECK(std::abs(j1["effects"]["ate"][0].get<double>() - 0.0543) <= 1e-12);
  const auto t2 = write_population("t2.csv", fixtures::binary_calibrated(0.9713, 0.9504));
  const auto j2 = run({"estimate", "-i", t2, "--baseline", "bad"}).parsed();
  CHECK(std::abs(j2["effects"]["ate"][0].get<double>() - 0.0209) <= 1e-12);
}

TEST_CASE("bounds on the two-type population") {
  const auto pop = write_population("b.csv", fixtures::dgp_b());
  const auto r = run({"bounds", "-i", pop, "--assumption", "bounded", "--kappa",
                      "0.04", "--categories", "c1,c2,c3"});
  REQUIRE(r.code == 0);
  const auto j = r.parsed();
  CHECK(j["regime"] == "bounded");
  CHECK(j["bounds_truncated"]["lower"]["pi1"][0].get<double>() ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(j["bounds_truncated"]["upper"]["pi1"][0].get<double>() ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(j["breakdown_kappa"][0]["kappa"].get<double>() ==
        doctest::Approx(0.06).epsilon(1e-12));

  const auto m = run({"bounds", "-i", pop, "--assumption", "monotonic",
                      "--categories", "c1,c2,c3"})
                     .parsed();
  CHECK(m["bounds_raw"]["upper"]["pi1"][0].get<double>() ==
        doctest::Approx(0.38 / 0.6).epsilon(1e-12));
  CHECK(m["ate_bounds"]["lower"][0].get<double>() ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(m["breakdown_kappa"].is_null());

  const auto n = run({"bounds", "-i", pop, "--categories", "c1,c2,c3"}).parsed();
  CHECK(n["regime"] == "none");
  CHECK(n["bounds_raw"]["lower"]["pi1"][0].get<double>() ==
        doctest::Approx(0.32).epsilon(1e-12));
}

TEST_CASE("sensitivity sweep") {
  const auto pop = write_population("b.csv", fixtures::dgp_b());
  const auto r = run({"sensitivity", "-i", pop, "--kappa-grid",
                      "0,0.02,0.04,0.06,0.08,0.1", "--categories", "c1,c2,c3"});
  REQUIRE(r.code == 0);
  const auto j = r.parsed();
  const auto &sweep = j["sweep"];
  REQUIRE(sweep.size() == 6);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i]["bounds_raw"]["lower"]["pi1"][0].get<double>() <=
          sweep[i - 1]["bounds_raw"]["lower"]["pi1"][0].get<double>());
    CHECK(sweep[i]["bounds_raw"]["upper"]["pi0"][0].get<double>() >=
          sweep[i - 1]["bounds_raw"]["upper"]["pi0"][0].get<double>());
  }
  CHECK(j["breakdown_kappa"][0]["kappa"].get<double>() ==
        doctest::Approx(0.06).epsilon(1e-12));
  CHECK(j["breakdown_kappa"][0]["kappa_bisection"].get<double>() ==
        doctest::Approx(0.06).epsilon(1e-9));
  CHECK(run({"sensitivity", "-i", pop, "--kappa-grid", "0.1,0.05"}).code ==
        kExitValidation);
  CHECK(run({"sensitivity", "-i", pop}).code == kExitValidation);
}

TEST_CASE("identical invocations give identical bytes") {
  const auto csv = (scratch() / "b_sample.csv").string();
  REQUIRE(run({"simulate", "--spec", data("dgp_b.json"), "--n", "3000",
               "--seed", "1", "--out", csv})
              .code == 0);
  const std::vector<std::string> args = {"estimate",  "-i",          csv,
                                         "--bootstrap", "99",        "--seed",
                                         "5",         "--no-timestamp"};
  const auto a = run(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto ja = a.parsed(), jc = run(threaded).parsed();
  CHECK(ja["bootstrap"] == jc["bootstrap"]);
  CHECK(ja["bootstrap"]["replicates_used"].get<int>() +
            ja["bootstrap"]["replicates_skipped"].get<int>() ==
        99);
  CHECK(ja["manifest"]["seeds"]["bootstrap"] == 5);

  const auto s1 = run({"simulate", "--spec", data("dgp_b.json"), "--n", "50",
                       "--seed", "3"});
  const auto s2 = run({"simulate", "--spec", data("dgp_b.json"), "--n", "50",
                       "--seed", "3"});
  CHECK(s1.out == s2.out);
  CHECK(s1.out.rfind("y,d,z\n", 0) == 0);
}

TEST_CASE("simulate diagnostics") {
  const auto r = run({"simulate", "--spec", data("dgp_b.json"), "--diagnostics"});
  REQUIRE(r.code == 0);
  const auto j = r.parsed();
  CHECK(j["assumption_flags"]["similarity"] == true);
  CHECK(j["cov"]["d1"][0][0].get<double>() == doctest::Approx(0.02));
  CHECK(run({"simulate", "--spec", data("dgp_b.json"), "--n", "0", "--seed", "1"})
            .code == kExitValidation);
  CHECK(run({"simulate", "--spec", data("missing.json"), "--diagnostics"}).code ==
        kExitValidation);
  const auto badspec = write_file("bad.json", R"({"types": [{"mass": 0.5}]})");
  CHECK(run({"simulate", "--spec", badspec, "--diagnostics"}).code ==
        kExitValidation);
}

TEST_CASE("config file supplies flags and the command line wins") {
  const auto pop = write_population("b.csv", fixtures::dgp_b());
  const auto cfg = write_file(
      "cfg.json", R"({"categories": ["c1", "c2", "c3"], "no-timestamp": true,
                      "bounds": {"assumption": "bounded", "kappa": 0.04}})");
  const auto j = run({"bounds", "-i", pop, "--config", cfg}).parsed();
  CHECK(j["regime"] == "bounded");
  CHECK(j["kappa"].get<double>() == 0.04);
  CHECK(j["manifest"]["timestamp"].is_null());
  CHECK(j["categories"][0] == "c1");
  const auto k = run({"bounds", "-i", pop, "--config", cfg, "--kappa", "0.02"})
                     .parsed();
  CHECK(k["kappa"].get<double>() == 0.02);
  CHECK(run({"bounds", "-i", pop, "--config", "/nonexistent.json"}).code ==
        kExitValidation);
}

TEST_CASE("table output") {
  const auto pop = write_population("a.csv", fixtures::dgp_a());
  const auto r = run({"estimate", "-i", pop, "--table", "--bootstrap", "20",
                      "--seed", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Point Estimate") != std::string::npos);
  CHECK(r.out.find("2.5%") != std::string::npos);
  CHECK(r.out.find("97.5%") != std::string::npos);
  CHECK(r.out.find("P(Y1=c1)") != std::string::npos);
}

TEST_CASE("stratified estimation") {
  std::ostringstream os;
  os << "y,d,z,stratum\n";
  const auto a = sample(fixtures::dgp_a(), 4000, 0.5, 1);
  const auto b = sample(fixtures::dgp_b(), 4000, 0.5, 2);
  for (const auto &r : a.records())
    os << a.categories()[r.y] << ',' << int(r.d) << ',' << int(r.z) << ",0\n";
  for (const auto &r : b.records())
    os << b.categories()[r.y] << ',' << int(r.d) << ',' << int(r.z) << ",1\n";
  const auto path = write_file("strat.csv", os.str());
  const auto j = run({"estimate", "-i", path, "--categories", "c1,c2,c3"}).parsed();
  REQUIRE(j["strata"].size() == 2);
  CHECK(j["strata"][0]["share"].get<double>() == doctest::Approx(0.5));
  const auto one =
      run({"estimate", "-i", path, "--stratum", "1", "--categories", "c1,c2,c3"})
          .parsed();
  CHECK(!one.contains("strata"));
  CHECK(std::abs(one["pi1"][0].get<double>() - 0.5) < 0.05);
}

TEST_CASE("selfcheck exit code follows the report") {
  const auto r = run({"selfcheck", "--count", "5", "--seed", "3"});
  const auto j = r.parsed();
  CHECK(r.code == (j["all_passed"].get<bool>() ? kExitOk : kExitPropertyFailure));
  CHECK(j["properties"].size() == 12);
}

TEST_CASE("sha256") {
  const auto path = write_file("abc.txt", "abc");
  CHECK(sha256_file(path) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(sha256_file("/nonexistent"), Error);
}

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "photonnet/netspec.hpp"
#include "test_helpers.hpp"

using namespace photonnet;
using namespace testutil;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json exampleJson() {
  return json::parse(slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
}

template <class Fn> std::string validationMessage(Fn fn) {
  try {
    fn();
  } catch (const ValidationError &e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string &hay, const std::string &needle) {
  return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("the example experiment parses to its golden snapshot") {
  Experiment e = parseExperimentText(
      slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
  std::string got = experimentToJson(e).dump(2) + "\n";
  CHECK(got == slurp(repoPath("tests/golden/qkd_singlet_sweep.parsed.json")));
}

TEST_CASE("parse and serialize are mutually inverse") {
  Experiment e = parseExperimentText(
      slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
  json first = experimentToJson(e);
  Experiment e2 = parseExperiment(first);
  CHECK(experimentToJson(e2) == first);
}

TEST_CASE("the example sweep reproduces its golden table") {
  Experiment e = parseExperimentText(
      slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
  RunResult r = runExperiment(e);
  CHECK(resultToCsv(r) == slurp(repoPath("tests/golden/qkd_singlet_sweep.csv")));
}

TEST_CASE("detector efficiency sweeps linearly for one photon") {
  json j = {
      {"schema_version", 1},
      {"grid",
       {{"omega_min", 1.0e15}, {"omega_max", 1.6e15}, {"bins", 3}}},
      {"modes",
       {{{"id", "a"}, {"fiber", "A"}, {"polarization", 1}, {"direction", "+"}}}},
      {"source",
       {{"kind", "single_photon"}, {"mode", "a"}, {"shape", {1.0, 2.0, 1.0}}}},
      {"channels", json::array()},
      {"detectors",
       {{{"id", "D"}, {"scope", {"a"}}, {"eta_det", 1.0}, {"p_dark", 0.0}}}},
      {"outputs", {"marginals"}},
      {"sweep",
       {{"parameter", "detectors.D.eta_det"}, {"values", {0.0, 0.5, 1.0}}}},
  };
  RunResult r = runExperiment(parseExperiment(j));
  REQUIRE(r.columns == std::vector<std::string>{"click_D"});
  REQUIRE(r.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(r.rows[i][0] == doctest::Approx(r.sweep_values[i]).epsilon(1e-12));
}

TEST_CASE("an attenuated coherent beam keeps the Poisson click law") {
  json j = {
      {"schema_version", 1},
      {"grid",
       {{"omega_min", 1.0e15}, {"omega_max", 1.6e15}, {"bins", 3}}},
      {"modes",
       {{{"id", "a"}, {"fiber", "A"}, {"polarization", 1}, {"direction", "+"}},
        {{"id", "t"}, {"fiber", "T"}, {"polarization", 1}, {"direction", "+"}},
        {{"id", "s"}, {"fiber", "S"}, {"polarization", 1}, {"direction", "+"}}}},
      {"source",
       {{"kind", "coherent"},
        {"mode", "a"},
        {"shape", {1.0, 2.0, 1.0}},
        {"alpha", {1.1, 0.4}}}},
      {"channels",
       {{{"kind", "beam_splitter"},
         {"input", "a"},
         {"outputs", {"t", "s"}},
         {"eta_trans", 0.36}}}},
      {"detectors",
       {{{"id", "D"}, {"scope", {"t"}}, {"eta_det", 0.7}, {"p_dark", 0.013}}}},
      {"outputs", {"marginals"}},
  };
  RunResult r = runExperiment(parseExperiment(j));
  REQUIRE(r.rows.size() == 1);
  double lambda = 1.1 * 1.1 + 0.4 * 0.4;
  double want = 1.0 - (1.0 - 0.013) * std::exp(-lambda * 0.36 * 0.7);
  CHECK(r.rows[0][0] == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("sweep tables do not depend on the thread budget") {
  Experiment e = parseExperimentText(
      slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
  setenv("PHOTONNET_THREADS", "1", 1);
  std::string serial = resultToCsv(runExperiment(e));
  setenv("PHOTONNET_THREADS", "4", 1);
  std::string parallel = resultToCsv(runExperiment(e));
  CHECK(serial == parallel);

  setenv("PHOTONNET_THREADS", "zero", 1);
  CHECK_THROWS_AS((void)runExperiment(e), ValidationError);
  unsetenv("PHOTONNET_THREADS");
}

TEST_CASE("parse errors name the offending field") {
  json base = exampleJson();

  json top = base;
  top["bogus"] = 1;
  CHECK(contains(validationMessage([&] { (void)parseExperiment(top); }),
                 "unknown field \"bogus\""));

  json version = base;
  version["schema_version"] = 2;
  CHECK(contains(validationMessage([&] { (void)parseExperiment(version); }),
                 "schema_version"));

  json scope = base;
  scope["detectors"][0]["scope"] = {"nope"};
  CHECK(contains(validationMessage([&] { (void)parseExperiment(scope); }),
                 "undeclared mode \"nope\""));

  json dup = base;
  dup["detectors"][1]["id"] = "DA1";
  CHECK(contains(validationMessage([&] { (void)parseExperiment(dup); }),
                 "repeated detector id"));

  json shared = base;
  shared["detectors"][1]["scope"] = {"a1"};
  CHECK(contains(validationMessage([&] { (void)parseExperiment(shared); }),
                 "already watched"));

  json skew = base;
  skew["channels"].push_back({{"kind", "custom_unitary"},
                              {"inputs", {"a1"}},
                              {"outputs", {"a1"}},
                              {"matrix", {{0.5}}}});
  CHECK(contains(validationMessage([&] { (void)parseExperiment(skew); }),
                 "residual"));

  CHECK(contains(validationMessage([&] { (void)parseExperimentText("{ nope"); }),
                 "invalid JSON"));

  json rot = base;
  rot["channels"][0]["u"] = 0.9;
  CHECK(contains(validationMessage([&] { (void)parseExperiment(rot); }),
                 "residual"));
}

TEST_CASE("result json mirrors the table") {
  Experiment e = parseExperimentText(
      slurp(repoPath("docs/examples/qkd_singlet_sweep.json")));
  RunResult r = runExperiment(e);
  json j = resultToJson(r);
  CHECK(j["sweep_parameter"] == "channels.1.eta_loss");
  CHECK(j["columns"].size() == r.columns.size());
  REQUIRE(j["points"].size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(j["points"][i]["value"].get<double>() == r.sweep_values[i]);
    for (std::size_t c = 0; c < r.columns.size(); ++c)
      CHECK(j["points"][i]["results"][r.columns[c]].get<double>() ==
            r.rows[i][c]);
  }

  // without a sweep the parameter column degenerates to a single point
  e.sweep.reset();
  RunResult single = runExperiment(e);
  CHECK(single.sweep_parameter.empty());
  CHECK(single.rows.size() == 1);
  CHECK(resultToJson(single)["sweep_parameter"].is_null());
  CHECK(resultToCsv(single).rfind("point,", 0) == 0);
}

TEST_CASE("the schema text documents the constructs it accepts") {
  std::string text = experimentSchemaText();
  for (const char *needle :
       {"schema_version", "beam_splitter", "outcome_table", "marginals",
        "detectors", "sweep", "qkd_singlet", "custom_unitary"})
    CHECK_MESSAGE(contains(text, needle), "schema text lacks " << needle);
}

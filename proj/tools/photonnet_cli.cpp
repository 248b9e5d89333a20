#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "photonnet/netspec.hpp"
#include "photonnet/verify.hpp"

namespace {

// --sweep-override flags replace the file's sweep with a single swept
// parameter; repeated flags extend the value list. Validation runs through
// the regular parser so overrides obey the same rules as file sweeps.
photonnet::Experiment applyOverrides(const photonnet::Experiment &e,
                                     const std::vector<std::string> &kv) {
  std::string parameter;
  std::vector<double> values;
  for (const std::string &s : kv) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw photonnet::ValidationError("--sweep-override: expected "
                                       "parameter=value, got \"" + s + "\"");
    const std::string key = s.substr(0, eq);
    if (parameter.empty())
      parameter = key;
    else if (parameter != key)
      throw photonnet::ValidationError(
          "--sweep-override: all overrides must name one parameter (saw \"" +
          parameter + "\" and \"" + key + "\")");
    const std::string vs = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(vs, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != vs.size())
      throw photonnet::ValidationError("--sweep-override: \"" + vs +
                                       "\" is not a number");
    values.push_back(v);
  }
  photonnet::json j = photonnet::experimentToJson(e);
  photonnet::json sweep;
  sweep["parameter"] = parameter;
  sweep["values"] = values;
  j["sweep"] = std::move(sweep);
  return photonnet::parseExperiment(j);
}

int runCommand(const std::string &file, const std::string &format,
               const std::vector<std::string> &overrides) {
  std::ifstream in(file);
  if (!in)
    throw photonnet::ValidationError("cannot open \"" + file + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  photonnet::Experiment e = photonnet::parseExperimentText(buf.str());
  if (!overrides.empty())
    e = applyOverrides(e, overrides);
  const photonnet::RunResult r = photonnet::runExperiment(e);
  if (format == "json")
    std::cout << photonnet::resultToJson(r).dump(2) << "\n";
  else
    std::cout << photonnet::resultToCsv(r);
  return 0;
}

int verifyCommand(std::uint64_t seed, int cases) {
  const photonnet::CrossValidationReport rep =
      photonnet::runOracleCrossValidation(seed, cases);
  for (const std::string &m : rep.messages)
    std::cerr << m << "\n";
  std::printf("oracle cross-check: %d cases, %d failures, max error %.3e\n",
              rep.cases, rep.failures, rep.max_error);
  return rep.failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Joint photon detection statistics for fiber-optic networks"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "Evaluate an experiment file");
  std::string file;
  run->add_option("file", file, "Experiment JSON file")->required();
  std::string format = "csv";
  run->add_option("--out", format, "Output format (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  std::vector<std::string> overrides;
  run->add_option("--sweep-override", overrides,
                  "Replace the sweep with parameter=value (repeatable)");

  auto *verify =
      app.add_subcommand("verify", "Run the randomized oracle cross-check");
  std::uint64_t seed = 20260815;
  verify->add_option("--seed", seed, "Random seed");
  int cases = 200;
  verify->add_option("--cases", cases, "Number of random cases")
      ->check(CLI::PositiveNumber);

  auto *schema =
      app.add_subcommand("schema", "Print the experiment file reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &h) {
    return app.exit(h);
  } catch (const CLI::ParseError &err) {
    app.exit(err);
    return 1;
  }

  try {
    if (schema->parsed()) {
      std::cout << photonnet::experimentSchemaText();
      return 0;
    }
    if (verify->parsed())
      return verifyCommand(seed, cases);
    return runCommand(file, format, overrides);
  } catch (const photonnet::ValidationError &err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const photonnet::ContractError &err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

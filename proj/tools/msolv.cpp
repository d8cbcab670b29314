// msolv <experiment> [flags] [--config <file>] [--out <file>] [--seed <int>] [--jobs <int>]
//
// Exit codes: 0 every assertion passed, 1 some assertion failed (the report
// carries the witness), 2 configuration or parse error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "msolv/msolv.hpp"

namespace ex = msolv::experiments;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ex::ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-level verification of m-step solvable quotient constructions"};
  std::string experiment, config_path, out_path, primes;
  std::optional<long long> seed, jobs, cap;
  bool timing = false, list = false;
  std::vector<std::string> params;
  std::map<std::string, std::string> flag_params;

  app.add_option("experiment", experiment, "experiment name, or 'suite' for all of them");
  app.add_flag("--list", list, "print the experiment names and exit");
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--out", out_path, "write the JSON report here instead of stdout");
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--jobs", jobs, "worker threads for the suite")->check(CLI::Range(1, 256));
  app.add_option("--primes", primes, "comma-separated prime set (default 2,3)");
  app.add_option("--cap", cap, "element cap for group closures")->check(CLI::PositiveNumber);
  app.add_flag("--timing", timing, "add wall-clock times to the report");
  app.add_option("--param", params, "extra experiment parameter key=value (repeatable)");
  for (const char* key : {"group", "x", "n", "l", "sigma", "m", "groups", "element"})
    app.add_option(std::string("--") + key, flag_params[key], std::string("experiment parameter '") + key + "'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& [name, f] : ex::registry()) std::cout << name << "\n";
    std::cout << "suite\n";
    return 0;
  }

  std::vector<msolv::report::ExperimentResult> results;
  try {
    ex::ExperimentConfig cfg;
    if (!config_path.empty()) ex::apply_config_text(cfg, read_file(config_path));
    if (!experiment.empty()) {
      if (!cfg.experiment.empty() && cfg.experiment != experiment)
        throw ex::ConfigError("command line names '" + experiment + "' but the config names '" + cfg.experiment + "'");
      cfg.experiment = experiment;
    }
    if (cfg.experiment.empty()) throw ex::ConfigError("no experiment given");
    if (seed) {
      if (*seed < 0) throw ex::ConfigError("--seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    if (jobs) cfg.jobs = static_cast<unsigned>(*jobs);
    if (cap) cfg.cap = static_cast<std::size_t>(*cap);
    if (!primes.empty()) cfg.primes = ex::parse_primes(primes);
    if (timing) cfg.timing = true;
    for (const auto& [k, v] : flag_params)
      if (!v.empty()) cfg.params[k] = v;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw ex::ConfigError("--param expects key=value, got " + p);
      cfg.params[ex::trim(p.substr(0, eq))] = ex::trim(p.substr(eq + 1));
    }
    results = ex::run(cfg);
  } catch (const msolv::ParseError& e) {
    std::cerr << "msolv: ParseError: " << e.what() << "\n";
    return 2;
  } catch (const msolv::Error& e) {
    // Everything the library rejects up front is a configuration problem:
    // bad preconditions, out-of-range indices, oversize inputs.
    std::cerr << "msolv: configuration error: " << e.what() << "\n";
    return 2;
  }

  const std::string doc = msolv::report::emit_report(results) + "\n";
  if (out_path.empty()) {
    std::cout << doc;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "msolv: cannot write " << out_path << "\n";
      return 2;
    }
    out << doc;
  }
  bool pass = true;
  for (const auto& r : results)
    if (!r.pass) {
      pass = false;
      std::cerr << "msolv: FAIL " << r.name << "\n";
    }
  return pass ? 0 : 1;
}

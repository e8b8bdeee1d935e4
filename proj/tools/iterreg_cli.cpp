#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iterreg/commands.hpp"
#include "iterreg/errors.hpp"

namespace {

using namespace iterreg;

// Loads the config file and applies --set overrides in order.
Json load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  Json doc = load_json_file(path);
  for (const auto& s : sets) apply_override(doc, s);
  return doc;
}

int with_config(const std::string& path, const std::vector<std::string>& sets, int (*cmd)(const RunConfig&, std::ostream&)) {
  RunConfig cfg;
  try {
    cfg = parse_config(load_with_overrides(path, sets));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return cmd(cfg, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel subgradient learning with early stopping"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;

  auto* train = app.add_subcommand("train", "Train on the configured data and write path, model and report files");
  train->add_option("-c,--config", config, "JSON run configuration")->required();
  train->add_option("--set", sets, "Override a config field, e.g. schedule.theta=0.75");

  auto* rates = app.add_subcommand("rates", "Sweep sample sizes and fit the excess-risk slope");
  rates->add_option("-c,--config", config, "JSON run configuration with a rates section")->required();
  rates->add_option("--set", sets, "Override a config field");

  std::string sample_out;
  auto* sample_cmd = app.add_subcommand("sample", "Export a synthetic sample from data.synthetic as CSV");
  sample_cmd->add_option("-c,--config", config, "JSON run configuration")->required();
  sample_cmd->add_option("--set", sets, "Override a config field");
  sample_cmd->add_option("-o,--out", sample_out, "Output CSV path")->required();

  IndicesRequest req;
  std::string rule = "general";
  std::string iterate = "last";
  std::int64_t m = 0;
  auto* indices = app.add_subcommand("indices", "Print the stopping and rate exponents");
  indices->add_option("--q", req.params.q, "Growth exponent of the loss derivative");
  indices->add_option("--tau", req.params.tau, "Variance-expectation exponent");
  indices->add_option("--beta", req.params.beta, "Approximation-error exponent");
  indices->add_option("--zeta", req.params.zeta, "Capacity exponent, below 2");
  indices->add_option("--theta", req.params.theta, "Step decay");
  indices->add_flag("--smooth", req.params.smooth, "Gradient steps for a smooth loss");
  indices->add_option("--rule", rule, "general, hinge or hinge_fixed")
      ->check(CLI::IsMember({"general", "hinge", "hinge_fixed"}));
  indices->add_option("--iterate", iterate, "last, averaged or best")->check(CLI::IsMember({"last", "averaged", "best"}));
  indices->add_option("--eps", req.eps, "Exponent offset for hinge_fixed");
  indices->add_option("--m", m, "Sample size; also prints T = ceil(m^gamma)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*train) return with_config(config, sets, &cmd_train);
  if (*rates) return with_config(config, sets, &cmd_rates);
  if (*sample_cmd) {
    RunConfig cfg;
    try {
      cfg = parse_config(load_with_overrides(config, sets));
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    const auto* syn = std::get_if<SyntheticData>(&cfg.data);
    if (syn == nullptr) {
      std::cerr << "config error: data: sample needs data.synthetic\n";
      return kExitConfig;
    }
    return cmd_sample(syn->dist, syn->m, cfg.seed, sample_out, std::cerr);
  }

  req.rule = rule == "hinge" ? IndicesRequest::Rule::hinge
             : rule == "hinge_fixed" ? IndicesRequest::Rule::hinge_fixed
                                     : IndicesRequest::Rule::general;
  req.iterate = iterate == "averaged" ? IterateKind::averaged : iterate == "best" ? IterateKind::best : IterateKind::last;
  if (m > 0) req.m = m;
  return cmd_indices(req, std::cout, std::cerr);
}

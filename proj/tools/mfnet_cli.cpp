#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mfnet/catalog.hpp"
#include "mfnet/driver.hpp"
#include "mfnet/errors.hpp"
#include "mfnet/io.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kBudget = 3, kNumerical = 4 };

struct Common {
  std::string config;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> budget;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Base seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--budget", c.budget, "Candidate-event budget per system");
  cmd->add_option("--threads", c.threads, "Worker threads for replicas");
}

mfnet::ExperimentConfig load(const Common& c, const std::string& experiment) {
  mfnet::Json doc = mfnet::Json::object();
  std::string base = ".";
  if (!c.config.empty()) {
    doc = mfnet::load_json(c.config);
    base = std::filesystem::path(c.config).parent_path().string();
    if (base.empty()) base = ".";
  }
  if (!c.variant.empty()) doc["experiment"] = "lln_rate_" + c.variant;
  return mfnet::parse_config(doc, experiment, {c.seed, c.out, c.budget, c.threads}, base);
}

// Each subcommand accepts only the experiments it drives.
void require_family(const mfnet::ExperimentConfig& cfg, std::initializer_list<const char*> allowed,
                    const std::string& cmd) {
  for (const char* a : allowed)
    if (cfg.experiment == a) return;
  throw mfnet::ValidationError("subcommand '" + cmd + "' cannot run experiment '" + cfg.experiment + "'");
}

int run(const Common& c, const std::string& cmd, const std::string& fallback,
        std::initializer_list<const char*> allowed) {
  const auto cfg = load(c, fallback);
  require_family(cfg, allowed, cmd);
  const auto report = mfnet::run_experiment(cfg);
  std::cout << report.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field network simulator and experiment driver"};
  app.require_subcommand(1);
  Common c;

  auto* simulate = app.add_subcommand("simulate", "Simulate one n-system and write its trajectories");
  auto* lln = app.add_subcommand("lln", "Coupled LLN rate sweep (fixed beta by default)");
  lln->add_option("--variant", c.variant, "fixed_beta, accel or iid")
      ->check(CLI::IsMember({"fixed_beta", "accel", "iid"}));
  auto* avg = app.add_subcommand("avg", "LLN rate sweep with accelerated edges beta(n)");
  auto* poc = app.add_subcommand("poc", "Propagation of chaos for node pairs");
  auto* compare = app.add_subcommand("compare-beta", "beta-systems vs the accelerated limit");
  auto* riccati = app.add_subcommand("riccati", "Forward equation vs simulated mu^n(t)");
  auto* clt = app.add_subcommand("clt", "Fluctuation experiments (clt or clt_mixture)");
  auto* trace = app.add_subcommand("trace", "Monte Carlo trace estimate");
  auto* validate = app.add_subcommand("validate", "Validate a config and its model");
  for (auto* cmd : {simulate, lln, avg, poc, compare, riccati, clt, trace, validate}) add_common(cmd, c);

  std::string model_name, model_out;
  auto* model = app.add_subcommand("model", "Write a built-in model as JSON");
  model->add_option("--name", model_name, "Catalog name")->required()->check(CLI::IsMember(mfnet::catalog_names()));
  model->add_option("--out", model_out, "Output path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run(c, "simulate", "simulate", {"simulate"});
    if (*lln)
      return run(c, "lln", "lln_rate_fixed_beta", {"lln_rate_fixed_beta", "lln_rate_accel", "lln_rate_iid"});
    if (*avg) return run(c, "avg", "lln_rate_accel", {"lln_rate_accel"});
    if (*poc) return run(c, "poc", "poc", {"poc"});
    if (*compare) return run(c, "compare-beta", "beta_comparison", {"beta_comparison"});
    if (*riccati) return run(c, "riccati", "riccati", {"riccati"});
    if (*clt) return run(c, "clt", "clt", {"clt", "clt_mixture"});
    if (*trace) return run(c, "trace", "trace", {"trace"});
    if (*validate) {
      const auto cfg = load(c, "simulate");
      std::cout << "ok: " << cfg.experiment << " on model " << cfg.model_source << '\n';
      return kOk;
    }
    if (*model) {
      const auto spec = mfnet::catalog_model(model_name);
      if (model_out.empty())
        std::cout << mfnet::model_to_json(spec).dump(2) << '\n';
      else
        mfnet::save_model(spec, model_out);
      return kOk;
    }
  } catch (const mfnet::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const mfnet::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const mfnet::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

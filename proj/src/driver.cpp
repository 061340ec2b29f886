#include "mfnet/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "mfnet/catalog.hpp"
#include "mfnet/clt.hpp"
#include "mfnet/errors.hpp"
#include "mfnet/experiments.hpp"
#include "mfnet/limits.hpp"
#include "mfnet/nsystem.hpp"
#include "mfnet/philox.hpp"
#include "mfnet/prm.hpp"

namespace fs = std::filesystem;

namespace mfnet {

namespace {

const std::vector<std::size_t> kDefaultNs = {50, 100, 200, 400, 800};

Json defaults_for(const std::string& experiment) {
  Json d = {{"replicas", 50}, {"seed", 1}, {"grid", 20}, {"out", "out/" + experiment}, {"event_budget", 5e8},
            {"threads", 1}, {"tracked_nodes", 10}};
  if (experiment == "simulate") {
    d["model"] = "default";
    d["sweep"] = {{"n", {50}}};
    d["replicas"] = 1;
    d["log_edges"] = false;
  } else if (experiment == "lln_rate_fixed_beta") {
    d["model"] = "default";
    d["sweep"] = {{"n", kDefaultNs}};
    d["beta"] = 1.0;
    d["n_ref"] = 3200;
  } else if (experiment == "lln_rate_accel") {
    d["model"] = "default";
    d["sweep"] = {{"n", kDefaultNs}};
  } else if (experiment == "lln_rate_iid") {
    d["model"] = "iid";
    d["sweep"] = {{"n", kDefaultNs}};
  } else if (experiment == "poc") {
    d["model"] = "default";
    d["sweep"] = {{"n", {50, 200, 800}}};
    d["beta"] = 1.0;
    d["replicas"] = 500;
    d["pairs"] = 5;
    d["bootstrap"] = 200;
  } else if (experiment == "beta_comparison") {
    d["model"] = "comparison";
    d["sweep"] = {{"beta", {4.0, 16.0, 64.0, 256.0}}};
    d["n_ref"] = 800;
  } else if (experiment == "riccati") {
    d["model"] = "default";
    d["sweep"] = {{"n", {800}}};
  } else if (experiment == "clt") {
    d["model"] = "clt";
    d["sweep"] = {{"n", {2000}}};
    d["replicas"] = 500;
    d["mc_chains"] = 1000000;
    d["variance_tolerance"] = 0.10;
    d["ks_alpha"] = 0.01;
  } else if (experiment == "clt_mixture") {
    d["model"] = "clt_mixture_coupled";
    d["sweep"] = {{"n", {1000}}};
    d["replicas"] = 500;
  } else if (experiment == "trace") {
    d["model"] = "clt_trace";
    d["sweep"] = {{"n", {1}}};
    d["replicas"] = 1;
    d["n_mc"] = 100000;
  } else {
    throw ValidationError("unknown experiment '" + experiment + "'");
  }
  return d;
}

template <typename T>
T field(const Json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string("config: field '") + key + "' is missing or has the wrong type");
  }
}

ModelSpec resolve_model(const Json& m, const std::string& base_dir, std::string& source) {
  if (m.is_object()) {
    if (m.contains("catalog")) return resolve_model(m.at("catalog"), base_dir, source);
    if (m.contains("path")) {
      const fs::path p = fs::path(base_dir) / field<std::string>(m, "path");
      source = p.string();
      return load_model(p.string());
    }
    source = "inline";
    return model_from_json(m);
  }
  if (!m.is_string()) throw ValidationError("config: 'model' must be a name, a path or an object");
  const auto name = m.get<std::string>();
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    source = name;
    return catalog_model(name);
  }
  const fs::path p = fs::path(base_dir) / name;
  if (!fs::exists(p)) throw ValidationError("config: model '" + name + "' is neither a catalog name nor a file");
  source = p.string();
  return load_model(p.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

RunSettings settings_of(const ExperimentConfig& cfg) {
  RunSettings s;
  s.seed = cfg.seed;
  s.replicas = cfg.replicas;
  s.threads = cfg.threads;
  s.event_budget = cfg.event_budget;
  s.grid_intervals = cfg.grid;
  s.tracked_nodes = field<std::size_t>(cfg.raw, "tracked_nodes");
  if (cfg.raw.contains("beta")) s.beta = field<double>(cfg.raw, "beta");
  return s;
}

std::vector<std::string> law_header(const ModelSpec& spec, const std::string& prefix) {
  std::vector<std::string> h;
  for (int v : spec.spaces.node.values()) h.push_back(prefix + std::to_string(v));
  return h;
}

Json simulate(const ExperimentConfig& cfg) {
  const ModelSpec& spec = cfg.spec;
  const std::size_t n = cfg.ns.front();
  SimOptions o;
  if (cfg.raw.contains("beta")) o.beta = field<double>(cfg.raw, "beta");
  o.event_budget = cfg.event_budget;
  o.log_edges = field<bool>(cfg.raw, "log_edges");
  o.logged_nodes = cfg.raw.contains("logged_nodes") ? field<std::size_t>(cfg.raw, "logged_nodes") : n;
  NSystem sys = NSystem::init(spec, n, cfg.seed, o);
  const StreamFamily family = make_stream_family(spec, cfg.seed, sys.beta());
  std::vector<std::string> header = {"t"};
  for (const auto& h : law_header(spec, "p_")) header.push_back(h);
  CsvWriter mu(join(cfg.out, "empirical.csv"), header);
  for (double t : uniform_grid(spec.horizon, cfg.grid)) {
    sys.run(family, t);
    std::vector<double> row = {t};
    for (double p : sys.global_empirical()) row.push_back(p);
    mu.row(row);
  }
  write_trajectory_csv(sys.log(), join(cfg.out, "trajectory.csv"));
  const auto& c = sys.counters();
  return {{"n", n},
          {"beta", sys.beta()},
          {"final_mu", sys.global_empirical()},
          {"node_candidates", c.node_candidates},
          {"node_accepted", c.node_accepted},
          {"edge_candidates", c.edge_candidates},
          {"edge_accepted", c.edge_accepted},
          {"files", {"empirical.csv", "trajectory.csv"}}};
}

Json lln(const ExperimentConfig& cfg) {
  const auto& spec = cfg.spec;
  Json report;
  RateFit fit;
  if (cfg.raw.contains("dry_run")) {
    // Harness self-test: errors synthesized as c / sqrt(n).
    const double c = field<double>(cfg.raw.at("dry_run"), "c");
    std::vector<double> xs, errors;
    for (std::size_t n : cfg.ns) {
      xs.push_back(static_cast<double>(n));
      errors.push_back(c / std::sqrt(static_cast<double>(n)));
    }
    fit = fit_rate(xs, errors);
    report["dry_run"] = true;
  } else {
    const LlnVariant variant = cfg.experiment == "lln_rate_fixed_beta" ? LlnVariant::FixedBeta
                               : cfg.experiment == "lln_rate_accel"    ? LlnVariant::Accel
                                                                       : LlnVariant::Iid;
    const std::size_t n_ref = cfg.raw.contains("n_ref") ? field<std::size_t>(cfg.raw, "n_ref") : 0;
    const LlnResult res = run_lln(spec, variant, cfg.ns, settings_of(cfg), n_ref);
    fit = res.fit;
    CsvWriter errs(join(cfg.out, "errors.csv"), {"n", "replica", "error"});
    for (std::size_t k = 0; k < res.ns.size(); ++k)
      for (std::size_t r = 0; r < res.errors[k].size(); ++r) errs.row(res.ns[k], r, res.errors[k][r]);
    std::vector<std::string> header = {"n", "t"};
    for (const auto& h : law_header(spec, "p_")) header.push_back(h);
    if (!res.dbl_to_limit.empty()) header.push_back("dbl_to_limit");
    CsvWriter mu(join(cfg.out, "empirical.csv"), header);
    for (std::size_t k = 0; k < res.ns.size(); ++k)
      for (std::size_t t = 0; t < res.grid.size(); ++t) {
        std::vector<double> row = {static_cast<double>(res.ns[k]), res.grid[t]};
        for (double p : res.mean_mu[k][t]) row.push_back(p);
        if (!res.dbl_to_limit.empty()) row.push_back(res.dbl_to_limit[k][t]);
        mu.row(row);
      }
    if (variant != LlnVariant::FixedBeta) {
      report["dbl_to_limit"] = res.dbl_to_limit;
      report["replica_dbl"] = res.replica_dbl;
      res.limit_law.write_csv(join(cfg.out, "limit.csv"), spec.spaces.node);
    }
    if (res.ns.size() < 4) {
      fit.xs.assign(res.ns.begin(), res.ns.end());
      fit.errors = res.mean;
      fit.ses = res.se;
    }
  }
  if (fit.xs.size() >= 4) report["fit"] = rate_fit_to_json(fit);
  report["xs"] = fit.xs;
  report["errors"] = fit.errors;
  report["ses"] = fit.ses;
  report["slope"] = fit.slope;
  report["ci_low"] = fit.ci_low;
  report["ci_high"] = fit.ci_high;
  write_rate_fit_csv(fit, join(cfg.out, "rate.csv"));
  return report;
}

Json poc(const ExperimentConfig& cfg) {
  const PocResult res = run_poc(cfg.spec, cfg.ns, settings_of(cfg), field<std::size_t>(cfg.raw, "pairs"),
                                field<std::size_t>(cfg.raw, "bootstrap"));
  CsvWriter csv(join(cfg.out, "poc.csv"), {"n", "dbl", "se"});
  for (std::size_t k = 0; k < res.ns.size(); ++k) csv.row(res.ns[k], res.dbl[k], res.dbl_se[k]);
  return {{"ns", res.ns}, {"pairs", res.pairs}, {"dbl", res.dbl}, {"dbl_se", res.dbl_se},
          {"joint", res.joint}, {"monotone_within_se", res.monotone}};
}

Json beta_comparison(const ExperimentConfig& cfg) {
  const BetaComparisonResult res =
      run_beta_comparison(cfg.spec, cfg.betas, field<std::size_t>(cfg.raw, "n_ref"), settings_of(cfg));
  CsvWriter csv(join(cfg.out, "beta.csv"), {"beta", "error", "se", "nu_dbl", "nu_dbl_se"});
  for (std::size_t b = 0; b < res.betas.size(); ++b)
    csv.row(res.betas[b], res.mean[b], res.se[b], res.nu_dbl[b], res.nu_dbl_se[b]);
  Json report = {{"betas", res.betas},   {"n_ref", res.n_ref},          {"errors", res.mean},
                 {"ses", res.se},        {"nu_dbl", res.nu_dbl},        {"nu_dbl_se", res.nu_dbl_se},
                 {"nu_monotone", res.nu_monotone}};
  if (res.betas.size() >= 4) {
    report["fit"] = rate_fit_to_json(res.fit);
    report["slope"] = res.fit.slope;
    report["ci_low"] = res.fit.ci_low;
    report["ci_high"] = res.fit.ci_high;
  }
  return report;
}

Json riccati(const ExperimentConfig& cfg) {
  const RiccatiResult res = run_riccati(cfg.spec, cfg.ns.front(), settings_of(cfg));
  res.riccati.write_csv(join(cfg.out, "riccati.csv"), cfg.spec.spaces.node);
  std::vector<std::string> header = {"t"};
  for (const auto& h : law_header(cfg.spec, "riccati_")) header.push_back(h);
  for (const auto& h : law_header(cfg.spec, "empirical_")) header.push_back(h);
  header.push_back("dbl");
  header.push_back("replica_dbl");
  CsvWriter csv(join(cfg.out, "overlay.csv"), header);
  for (std::size_t t = 0; t < res.grid.size(); ++t) {
    std::vector<double> row = {res.grid[t]};
    row.insert(row.end(), res.riccati.p[t].begin(), res.riccati.p[t].end());
    row.insert(row.end(), res.mean_mu[t].begin(), res.mean_mu[t].end());
    row.push_back(res.dbl[t]);
    row.push_back(res.replica_dbl[t]);
    csv.row(row);
  }
  invariant_map(cfg.spec).write_csv(join(cfg.out, "invariant.csv"), cfg.spec);
  return {{"n", res.n},
          {"grid", res.grid},
          {"dbl", res.dbl},
          {"replica_dbl", res.replica_dbl},
          {"max_dbl", *std::max_element(res.dbl.begin(), res.dbl.end())},
          {"max_replica_dbl", *std::max_element(res.replica_dbl.begin(), res.replica_dbl.end())}};
}

std::vector<Functional> functionals_of(const ExperimentConfig& cfg) {
  std::vector<Functional> out;
  if (!cfg.raw.contains("functionals")) {
    out.push_back(Functional::single_time(cfg.spec.horizon));
    return out;
  }
  for (const auto& f : cfg.raw.at("functionals")) {
    auto a = field<std::vector<double>>(f, "a");
    auto t = field<std::vector<double>>(f, "t");
    Functional phi = a.size() == 1 ? Functional::single_time(t.at(0), a[0]) : Functional::multi_time(a, t);
    try {
      phi.check(cfg.spec.horizon);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
    out.push_back(std::move(phi));
  }
  return out;
}

CltOptions clt_options(const ExperimentConfig& cfg) {
  CltOptions o;
  o.threads = cfg.threads;
  o.event_budget = cfg.event_budget;
  if (cfg.raw.contains("mc_chains")) o.mc_chains = field<std::size_t>(cfg.raw, "mc_chains");
  if (cfg.raw.contains("variance_tolerance")) o.variance_tolerance = field<double>(cfg.raw, "variance_tolerance");
  if (cfg.raw.contains("ks_alpha")) o.ks_alpha = field<double>(cfg.raw, "ks_alpha");
  return o;
}

Json clt(const ExperimentConfig& cfg) {
  const auto phis = functionals_of(cfg);
  const auto reports = run_clt_experiment(cfg.spec, cfg.ns.front(), cfg.replicas, phis, cfg.seed, clt_options(cfg));
  Json list = Json::array();
  for (std::size_t f = 0; f < reports.size(); ++f) {
    const auto& r = reports[f];
    CsvWriter csv(join(cfg.out, "eta_" + std::to_string(f) + ".csv"), {"replica", "eta"});
    for (std::size_t k = 0; k < r.eta.size(); ++k) csv.row(k, r.eta[k]);
    list.push_back({{"n", r.n},
                    {"R", r.replicas},
                    {"a", phis[f].a},
                    {"t", phis[f].t},
                    {"sigma2_ref", r.sigma2_ref},
                    {"sigma2_ref_se", r.sigma2_ref_se},
                    {"sigma2_ref_mc", r.sigma2_ref_mc},
                    {"sample_var", r.sample_var},
                    {"sample_var_se", r.sample_var_se},
                    {"ks_stat", r.ks_stat},
                    {"ks_p", r.ks_p},
                    {"kurtosis", r.kurtosis},
                    {"kurtosis_se", r.kurtosis_se},
                    {"pass_flags",
                     {{"relative", r.pass_relative}, {"within_3se", r.pass_3se}, {"ks", r.pass_ks}}}});
  }
  return {{"functionals", list}};
}

Json clt_mixture(const ExperimentConfig& cfg) {
  const auto r = edge_functional_kurtosis(cfg.spec, cfg.ns.front(), cfg.replicas, cfg.seed, clt_options(cfg));
  CsvWriter csv(join(cfg.out, "edge_eta.csv"), {"replica", "eta"});
  for (std::size_t k = 0; k < r.samples.size(); ++k) csv.row(k, r.samples[k]);
  return {{"n", r.n}, {"R", r.replicas}, {"mean", r.mean}, {"kurtosis", r.kurtosis}, {"kurtosis_se", r.kurtosis_se}};
}

Json trace(const ExperimentConfig& cfg) {
  const auto grid = uniform_grid(cfg.spec.horizon, cfg.grid);
  const auto r = trace_lambda_estimate(cfg.spec, field<std::size_t>(cfg.raw, "n_mc"), grid, cfg.seed);
  std::vector<std::string> header = {"t"};
  for (int y : cfg.spec.spaces.marks.values()) {
    header.push_back("lambda_" + std::to_string(y));
    header.push_back("se_" + std::to_string(y));
  }
  CsvWriter csv(join(cfg.out, "lambda.csv"), header);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> row = {grid[k]};
    for (std::size_t y = 0; y < r.lambda.size(); ++y) {
      row.push_back(r.lambda[y][k]);
      row.push_back(r.lambda_se[y][k]);
    }
    csv.row(row);
  }
  return {{"trace", r.trace}, {"trace_se", r.trace_se}, {"n_mc", field<std::size_t>(cfg.raw, "n_mc")}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"simulate", "lln_rate_fixed_beta", "lln_rate_accel", "lln_rate_iid", "poc",
          "beta_comparison", "riccati", "clt", "clt_mixture", "trace"};
}

std::uint64_t config_hash(const Json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config(Json doc, const std::string& experiment, const ConfigOverrides& overrides,
                              const std::string& base_dir) {
  if (doc.is_null()) doc = Json::object();
  if (!doc.is_object()) throw ValidationError("config: document must be a JSON object");
  const std::string name = doc.contains("experiment") ? field<std::string>(doc, "experiment") : experiment;
  Json merged = defaults_for(name);
  merged.update(doc);
  merged["experiment"] = name;
  if (overrides.seed) merged["seed"] = *overrides.seed;
  if (overrides.out) merged["out"] = *overrides.out;
  if (overrides.budget) merged["event_budget"] = *overrides.budget;
  if (overrides.threads) merged["threads"] = *overrides.threads;

  ExperimentConfig cfg;
  cfg.experiment = name;
  cfg.spec = resolve_model(merged.at("model"), base_dir, cfg.model_source);
  const auto report = validate(cfg.spec);
  if (!report.ok()) throw ValidationError("model fails validation:\n" + report.summary());

  const Json& sweep = merged.at("sweep");
  if (!sweep.is_object()) throw ValidationError("config: 'sweep' must be an object");
  if (sweep.contains("n")) cfg.ns = field<std::vector<std::size_t>>(sweep, "n");
  if (sweep.contains("beta")) cfg.betas = field<std::vector<double>>(sweep, "beta");
  if (cfg.ns.empty() && cfg.betas.empty()) throw ValidationError("config: sweep is empty");
  if (name == "beta_comparison" ? cfg.betas.empty() : cfg.ns.empty())
    throw ValidationError("config: sweep lacks the values this experiment iterates over");

  cfg.replicas = field<std::size_t>(merged, "replicas");
  if (cfg.replicas < 1) throw ValidationError("config: replicas must be at least 1");
  cfg.seed = field<std::uint64_t>(merged, "seed");
  cfg.grid = field<std::size_t>(merged, "grid");
  if (cfg.grid < 1) throw ValidationError("config: grid must be at least 1");
  cfg.out = field<std::string>(merged, "out");
  cfg.event_budget = field<double>(merged, "event_budget");
  if (!(cfg.event_budget > 0.0)) throw ValidationError("config: event_budget must be positive");
  cfg.threads = std::max<std::size_t>(1, field<std::size_t>(merged, "threads"));
  cfg.raw = std::move(merged);
  if (name == "clt") functionals_of(cfg);
  return cfg;
}

Json run_experiment(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out);
  Json report;
  const std::string& e = cfg.experiment;
  if (e == "simulate") report = simulate(cfg);
  else if (e.rfind("lln_rate_", 0) == 0) report = lln(cfg);
  else if (e == "poc") report = poc(cfg);
  else if (e == "beta_comparison") report = beta_comparison(cfg);
  else if (e == "riccati") report = riccati(cfg);
  else if (e == "clt") report = clt(cfg);
  else if (e == "clt_mixture") report = clt_mixture(cfg);
  else if (e == "trace") report = trace(cfg);
  else throw ValidationError("unknown experiment '" + e + "'");
  report["experiment"] = e;
  save_json(report, join(cfg.out, "report.json"));

  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg.raw);
  const Json manifest = {{"config", cfg.raw},
                         {"config_hash", hash.str()},
                         {"model_source", cfg.model_source},
                         {"seeds", {{"base", cfg.seed}, {"replicas", cfg.replicas}, {"rule", "derive_seed(base, r)"}}},
                         {"versions", {{"mfnet", kVersion}, {"compiler", __VERSION__}}},
                         {"timestamp", utc_timestamp()}};
  save_json(manifest, join(cfg.out, "manifest.json"));
  return report;
}

}  // namespace mfnet

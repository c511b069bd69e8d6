// Command-line front end: simulation, method comparison, sweeps, sensitivity
// analysis, posterior predictive checks, single fits, and held-out evaluation.
// Every command emits a manifest.json that `pif rerun` replays bit-identically
// (runtime columns aside).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pif/errors.hpp"
#include "pif/experiment.hpp"
#include "pif/factor_models.hpp"
#include "pif/influence.hpp"
#include "pif/io.hpp"
#include "pif/simulator.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string token;
  for (char c : csv) {
    if (c == ',') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

std::vector<pif::Variant> parse_methods(const std::string& csv) {
  std::vector<pif::Variant> methods;
  for (const auto& name : split_list(csv)) {
    methods.push_back(pif::variant_from_string(name));
  }
  if (methods.empty()) throw pif::ConfigError("methods list is empty");
  return methods;
}

std::string join_names(const json& array) {
  std::string joined;
  for (const auto& m : array) {
    if (!joined.empty()) joined += ",";
    joined += m.get<std::string>();
  }
  return joined;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  for (const auto& tok : split_list(csv)) seeds.push_back(std::stoull(tok));
  if (seeds.empty()) throw pif::ConfigError("seeds list is empty");
  return seeds;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pif::DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw pif::ConfigError(path + ": " + e.what());
  }
}

void write_manifest(const json& manifest, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw pif::DataError("cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
}

// Flags shared by the fitting commands.
struct CommonFitFlags {
  int k = 5;
  int q = 5;
  int max_sweeps = 500;
  double tol = 1e-4;
  int check_every = 5;
  bool binarize = false;
  int threads = 0;      // 0 -> PIF_THREADS or 1
  int fit_threads = 1;  // intra-fit stripes; 1 is the reproducibility reference
  std::string options_json;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "community factors (default 5)");
    cmd->add_option("--q", q, "purchase factors (default 5)");
    cmd->add_option("--max-sweeps", max_sweeps, "CAVI sweep cap (default 500)");
    cmd->add_option("--tol", tol, "relative ELBO tolerance (default 1e-4)");
    cmd->add_option("--check-every", check_every, "convergence check cadence");
    cmd->add_flag("--binarize", binarize, "binarize the exposure term");
    cmd->add_option("--threads", threads,
                    "worker threads for grid cells (default $PIF_THREADS or 1)");
    cmd->add_option("--fit-threads", fit_threads,
                    "threads inside one fit's allocation passes (default 1; "
                    "results drift at most ~1e-12 from the serial reference)");
    cmd->add_option("--options-json", options_json,
                    "JSON file with the full method options");
  }

  pif::MethodOptions resolve() const {
    pif::MethodOptions opts;
    if (!options_json.empty()) {
      opts = pif::method_options_from_json(load_json(options_json));
    }
    opts.K = k;
    opts.Q = q;
    opts.fit.max_sweeps = max_sweeps;
    opts.fit.elbo_rel_tol = tol;
    opts.fit.elbo_check_every = check_every;
    opts.binarize_exposure = binarize;
    opts.fit.threads = std::max(1, fit_threads);
    if (threads > 0) {
      opts.threads = threads;
    } else if (const char* env = std::getenv("PIF_THREADS")) {
      opts.threads = std::max(1, std::atoi(env));
    }
    return opts;
  }
};

void do_simulate(const pif::SimConfig& cfg, const std::string& out) {
  const pif::Dataset ds = pif::simulate_dataset(cfg);
  pif::write_dataset(ds, cfg, out);
  std::cout << "dataset written to " << out << " (n=" << cfg.n_persons
            << ", m=" << cfg.n_items << ", edges=" << ds.adjacency.n_edges()
            << ", x nnz=" << ds.x.nnz() << ", y nnz=" << ds.y.nnz() << ")\n";
}

void do_compare(const std::string& dataset_dir, const std::vector<pif::Variant>& methods,
                const pif::MethodOptions& opts, std::optional<std::uint64_t> seed,
                const std::string& out) {
  const pif::Dataset ds = pif::load_dataset(dataset_dir);
  const pif::SimConfig cfg = pif::load_dataset_config(dataset_dir);
  const std::uint64_t master = seed.value_or(cfg.seed);
  pif::CompareReport report = pif::run_compare(ds, cfg, methods, opts, master);
  report.manifest["dataset"] = dataset_dir;
  std::filesystem::create_directories(out);
  pif::write_text(out + "/report.csv", pif::compare_csv(report.rows));
  write_manifest(report.manifest, out);
  std::cout << pif::compare_csv(report.rows);
}

void do_sweep(const pif::SimConfig& base, const std::vector<std::string>& setting_names,
              const std::vector<std::string>& level_names,
              const std::vector<std::uint64_t>& seeds,
              const std::vector<pif::Variant>& methods, const pif::MethodOptions& opts,
              const std::string& out) {
  std::vector<pif::Setting> settings;
  for (const auto& s : setting_names) settings.push_back(pif::setting_from_string(s));
  std::vector<pif::Level> levels;
  for (const auto& l : level_names) levels.push_back(pif::level_from_string(l));
  pif::SweepReport report = pif::run_sweep(base, settings, levels, seeds, methods, opts);
  std::filesystem::create_directories(out);
  pif::write_text(out + "/rows.csv", pif::compare_csv(report.rows));
  pif::write_text(out + "/aggregate.csv", pif::aggregate_csv(report.aggregates));
  write_manifest(report.manifest, out);
  std::cout << pif::aggregate_csv(report.aggregates);
}

void do_sensitivity(const pif::SimConfig& base, const std::vector<double>& strengths,
                    double frac_pairs, int n_shared_items,
                    const std::vector<std::uint64_t>& seeds,
                    const pif::MethodOptions& opts, const std::string& out) {
  pif::SensitivityReport report =
      pif::run_sensitivity(base, strengths, frac_pairs, n_shared_items, seeds, opts);
  std::filesystem::create_directories(out);
  pif::write_text(out + "/rows.csv", pif::sensitivity_csv(report.rows));
  std::ostringstream curve;
  curve << "strength,mse_mean,mse_se\n";
  for (std::size_t t = 0; t < report.strengths.size(); ++t) {
    curve << pif::format_double(report.strengths[t]) << ","
          << pif::format_double(report.mse_mean[t]) << ","
          << pif::format_double(report.mse_se[t]) << "\n";
  }
  pif::write_text(out + "/curve.csv", curve.str());
  write_manifest(report.manifest, out);
  std::cout << curve.str();
  std::cout << "monotone_trend=" << (report.monotone_trend ? "true" : "false") << "\n";
}

void do_ppc(const std::string& dataset_dir, const std::string& model,
            const std::vector<int>& k_list, double fraction, int replicates,
            const pif::MethodOptions& opts, std::uint64_t seed, const std::string& out) {
  const pif::Dataset ds = pif::load_dataset(dataset_dir);
  pif::PpcReport report = pif::run_ppc_command(
      ds, pif::factor_kind_from_string(model), k_list, fraction, replicates, opts, seed);
  report.manifest["dataset"] = dataset_dir;
  std::filesystem::create_directories(out);
  pif::write_text(out + "/ppc.csv", pif::ppc_csv(report.rows));
  write_manifest(report.manifest, out);
  std::cout << pif::ppc_csv(report.rows);
}

void do_evaluate(const std::string& dataset_dir, const std::vector<pif::Variant>& methods,
                 double fraction, const pif::MethodOptions& opts,
                 std::optional<std::uint64_t> seed, const std::string& out) {
  const pif::Dataset ds = pif::load_dataset(dataset_dir);
  const pif::SimConfig cfg = pif::load_dataset_config(dataset_dir);
  const std::uint64_t master = seed.value_or(cfg.seed);
  pif::EvaluateReport report =
      pif::run_evaluate(ds, cfg, methods, fraction, opts, master);
  report.manifest["dataset"] = dataset_dir;
  report.manifest["seed"] = master;
  std::filesystem::create_directories(out);
  pif::write_text(out + "/evaluate.csv", pif::evaluate_csv(report.rows));
  write_manifest(report.manifest, out);
  std::cout << pif::evaluate_csv(report.rows);
}

void do_fit(const std::string& dataset_dir, const std::string& model,
            const pif::MethodOptions& opts, std::optional<std::uint64_t> seed,
            const std::string& out) {
  const pif::Dataset ds = pif::load_dataset(dataset_dir);
  const pif::SimConfig cfg = pif::load_dataset_config(dataset_dir);
  const std::uint64_t master = seed.value_or(cfg.seed);
  if (model == "network" || model == "pmf" || model == "joint") {
    pif::FitOptions fit = opts.fit;
    fit.seed = master;
    const pif::FactorKind kind = pif::factor_kind_from_string(model);
    pif::FactorFit result;
    if (kind == pif::FactorKind::Network) {
      result = pif::fit_network(ds.adjacency, opts.K, opts.factor_prior, fit);
    } else if (kind == pif::FactorKind::Pmf) {
      result = pif::fit_pmf(ds.x, opts.Q, opts.factor_prior, fit);
    } else {
      result = pif::fit_joint(ds.adjacency, ds.x, opts.K, opts.factor_prior, fit);
    }
    pif::save_factor_fit(result, out);
    std::cout << "factor fit (" << model << ", K=" << result.K << ") written to "
              << out << ", converged=" << (result.converged ? "true" : "false") << "\n";
  } else {
    const pif::Variant variant = pif::variant_from_string(model);
    pif::InfluencePosterior post = pif::fit_method(ds, variant, opts, master);
    pif::save_influence(post, out);
    std::cout << "influence fit (" << model << ") written to " << out
              << ", converged=" << (post.converged ? "true" : "false") << "\n";
  }
}

int dispatch_manifest(const json& manifest, const std::string& out) {
  const std::string command = manifest.at("command").get<std::string>();
  if (command == "simulate") {
    do_simulate(pif::sim_config_from_json(manifest.at("config")), out);
    return kExitOk;
  }
  const pif::MethodOptions opts =
      manifest.contains("options") ? pif::method_options_from_json(manifest.at("options"))
                                   : pif::MethodOptions{};
  if (command == "compare") {
    do_compare(manifest.at("dataset").get<std::string>(),
               parse_methods(join_names(manifest.at("methods"))), opts,
               manifest.at("seed").get<std::uint64_t>(), out);
    return kExitOk;
  }
  if (command == "sweep") {
    const pif::SimConfig base = pif::sim_config_from_json(manifest.at("config"));
    do_sweep(base, manifest.at("settings").get<std::vector<std::string>>(),
             manifest.at("levels").get<std::vector<std::string>>(),
             manifest.at("seeds").get<std::vector<std::uint64_t>>(),
             parse_methods(join_names(manifest.at("methods"))), opts, out);
    return kExitOk;
  }
  if (command == "sensitivity") {
    const pif::SimConfig base = pif::sim_config_from_json(manifest.at("config"));
    do_sensitivity(base, manifest.at("strengths").get<std::vector<double>>(),
                   manifest.at("frac_pairs").get<double>(),
                   manifest.at("n_shared_items").get<int>(),
                   manifest.at("seeds").get<std::vector<std::uint64_t>>(), opts, out);
    return kExitOk;
  }
  if (command == "ppc") {
    do_ppc(manifest.at("dataset").get<std::string>(),
           manifest.at("model").get<std::string>(),
           manifest.at("k_list").get<std::vector<int>>(),
           manifest.at("holdout_fraction").get<double>(),
           manifest.at("n_replicates").get<int>(), opts,
           manifest.at("seed").get<std::uint64_t>(), out);
    return kExitOk;
  }
  if (command == "evaluate") {
    do_evaluate(manifest.at("dataset").get<std::string>(),
                parse_methods(join_names(manifest.at("methods"))),
                manifest.at("holdout_fraction").get<double>(), opts,
                manifest.at("seed").get<std::uint64_t>(), out);
    return kExitOk;
  }
  throw pif::ConfigError("rerun: unknown command '" + command + "'");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Poisson influence factorization toolkit"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a semi-synthetic dataset");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "SimConfig JSON file")->required();
  sim->add_option("--out", sim_out, "output dataset directory")->required();

  auto* cmp = app.add_subcommand("compare", "fit methods on a dataset, report MSE");
  std::string cmp_dataset, cmp_methods, cmp_out;
  std::uint64_t cmp_seed = 0;
  CommonFitFlags cmp_flags;
  cmp->add_option("--dataset", cmp_dataset, "dataset directory")->required();
  cmp->add_option("--methods", cmp_methods,
                  "comma list: oracle,unadjusted,net-only,mspf,pif-net,pif-joint")
      ->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--seed", cmp_seed, "fit seed (default: dataset seed)");
  cmp_flags.attach(cmp);

  auto* swp = app.add_subcommand("sweep", "settings x levels x seeds grid");
  std::string swp_config, swp_settings = "item,homophily,both";
  std::string swp_levels = "low,med,high";
  std::string swp_seeds, swp_methods, swp_out;
  CommonFitFlags swp_flags;
  swp->add_option("--config", swp_config, "base SimConfig JSON file")->required();
  swp->add_option("--settings", swp_settings, "comma list of settings");
  swp->add_option("--levels", swp_levels, "comma list of levels");
  swp->add_option("--seeds", swp_seeds, "comma list of seeds")->required();
  swp->add_option("--methods", swp_methods, "comma list of methods")->required();
  swp->add_option("--out", swp_out, "output directory")->required();
  swp_flags.attach(swp);

  auto* sen = app.add_subcommand("sensitivity", "violation strength sweep for pif-joint");
  std::string sen_config, sen_strengths, sen_seeds, sen_out;
  double sen_frac = 0.3;
  int sen_items = 0;
  CommonFitFlags sen_flags;
  sen->add_option("--config", sen_config, "base SimConfig JSON file")->required();
  sen->add_option("--strengths", sen_strengths, "comma list of relative strengths")
      ->required();
  sen->add_option("--frac-pairs", sen_frac, "fraction of edges sharing a preference");
  sen->add_option("--shared-items", sen_items, "items shared per edge (default m/3)");
  sen->add_option("--seeds", sen_seeds, "comma list of seeds")->required();
  sen->add_option("--out", sen_out, "output directory")->required();
  sen_flags.attach(sen);

  auto* ppc = app.add_subcommand("ppc", "posterior predictive checks per K");
  std::string ppc_dataset, ppc_model = "pmf", ppc_klist = "3,5,8,10", ppc_out;
  double ppc_fraction = 0.1;
  int ppc_reps = 100;
  std::uint64_t ppc_seed = 1;
  CommonFitFlags ppc_flags;
  ppc->add_option("--dataset", ppc_dataset, "dataset directory")->required();
  ppc->add_option("--model", ppc_model, "network|pmf|joint");
  ppc->add_option("--k-list", ppc_klist, "comma list of factor counts");
  ppc->add_option("--fraction", ppc_fraction, "held-out fraction per row");
  ppc->add_option("--replicates", ppc_reps, "replicated datasets (default 100)");
  ppc->add_option("--seed", ppc_seed, "rng seed");
  ppc->add_option("--out", ppc_out, "output directory")->required();
  ppc_flags.attach(ppc);

  auto* fit = app.add_subcommand("fit", "fit one model and serialize the bundle");
  std::string fit_dataset, fit_model, fit_out;
  std::uint64_t fit_seed = 0;
  CommonFitFlags fit_flags;
  fit->add_option("--dataset", fit_dataset, "dataset directory")->required();
  fit->add_option("--model", fit_model,
                  "network|pmf|joint or a method (oracle, pif-joint, ...)")
      ->required();
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--seed", fit_seed, "fit seed (default: dataset seed)");
  fit_flags.attach(fit);

  auto* evl = app.add_subcommand("evaluate", "held-out prediction metrics");
  std::string evl_dataset, evl_methods, evl_out;
  double evl_fraction = 0.2;
  std::uint64_t evl_seed = 0;
  CommonFitFlags evl_flags;
  evl->add_option("--dataset", evl_dataset, "dataset directory")->required();
  evl->add_option("--methods", evl_methods, "comma list of methods")->required();
  evl->add_option("--fraction", evl_fraction, "held-out fraction of y per row");
  evl->add_option("--seed", evl_seed, "rng seed (default: dataset seed)");
  evl->add_option("--out", evl_out, "output directory")->required();
  evl_flags.attach(evl);

  auto* rrn = app.add_subcommand("rerun", "replay a command from its manifest");
  std::string rrn_manifest, rrn_out;
  rrn->add_option("--manifest", rrn_manifest, "manifest.json from a previous run")
      ->required();
  rrn->add_option("--out", rrn_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    do_simulate(pif::sim_config_from_json(load_json(sim_config)), sim_out);
  } else if (cmp->parsed()) {
    do_compare(cmp_dataset, parse_methods(cmp_methods), cmp_flags.resolve(),
               cmp->count("--seed") ? std::optional<std::uint64_t>(cmp_seed)
                                    : std::nullopt,
               cmp_out);
  } else if (swp->parsed()) {
    do_sweep(pif::sim_config_from_json(load_json(swp_config)), split_list(swp_settings),
             split_list(swp_levels), parse_seeds(swp_seeds), parse_methods(swp_methods),
             swp_flags.resolve(), swp_out);
  } else if (sen->parsed()) {
    const pif::SimConfig base = pif::sim_config_from_json(load_json(sen_config));
    std::vector<double> strengths;
    for (const auto& tok : split_list(sen_strengths)) strengths.push_back(std::stod(tok));
    if (strengths.empty()) throw pif::ConfigError("sensitivity: empty strength grid");
    const int items = sen_items > 0 ? sen_items : base.n_items / 3;
    do_sensitivity(base, strengths, sen_frac, items, parse_seeds(sen_seeds),
                   sen_flags.resolve(), sen_out);
  } else if (ppc->parsed()) {
    std::vector<int> k_list;
    for (const auto& tok : split_list(ppc_klist)) k_list.push_back(std::stoi(tok));
    do_ppc(ppc_dataset, ppc_model, k_list, ppc_fraction, ppc_reps, ppc_flags.resolve(),
           ppc_seed, ppc_out);
  } else if (fit->parsed()) {
    do_fit(fit_dataset, fit_model, fit_flags.resolve(),
           fit->count("--seed") ? std::optional<std::uint64_t>(fit_seed) : std::nullopt,
           fit_out);
  } else if (evl->parsed()) {
    do_evaluate(evl_dataset, parse_methods(evl_methods), evl_fraction,
                evl_flags.resolve(),
                evl->count("--seed") ? std::optional<std::uint64_t>(evl_seed)
                                     : std::nullopt,
                evl_out);
  } else if (rrn->parsed()) {
    return dispatch_manifest(load_json(rrn_manifest), rrn_out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const pif::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pif::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const pif::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

#include "pif/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "pif/errors.hpp"
#include "pif/factor_models.hpp"
#include "pif/io.hpp"

namespace pif {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_tasks <= 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int width = std::min(threads, n_tasks);
  pool.reserve(width);
  for (int t = 0; t < width; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// per-purpose rng/seed stream tags
enum : std::uint64_t {
  kSeedNetworkFit = 101,
  kSeedPmfFit = 102,
  kSeedJointFit = 103,
  kSeedOutcome = 200,  // + variant index
  kSeedPpc = 300,
  kSeedEvaluate = 400,
};

struct FittedMethod {
  InfluencePosterior posterior;
  OutcomeInputs inputs;  // grids copied so rate lookups outlive the fit
  double runtime_sec = 0.0;
};

// Shared first-stage fits for one dataset.
struct SubstituteSet {
  std::optional<FactorFit> network;
  std::optional<FactorFit> pmf;
  std::optional<FactorFit> joint;
  double runtime_sec = 0.0;
};

// Substitute fits restart from a few jittered inits and keep the highest
// final ELBO; coordinate ascent on the factor models is prone to local
// optima and the restart winner is markedly more stable.
FactorFit best_of_restarts(const std::function<FactorFit(std::uint64_t)>& fit_once,
                           std::uint64_t base_seed, int n_restarts) {
  FactorFit best = fit_once(base_seed);
  for (int r = 1; r < n_restarts; ++r) {
    FactorFit candidate = fit_once(mix_seed(base_seed, 7000 + r));
    if (!candidate.elbo_trace.empty() && !best.elbo_trace.empty() &&
        candidate.elbo_trace.back() > best.elbo_trace.back()) {
      best = std::move(candidate);
    }
  }
  return best;
}

SubstituteSet fit_substitutes(const Dataset& ds, const std::vector<Variant>& methods,
                              const MethodOptions& opts, std::uint64_t master_seed) {
  SubstituteSet subs;
  const auto start = std::chrono::steady_clock::now();
  const bool need_net =
      std::count(methods.begin(), methods.end(), Variant::PifNet) > 0 ||
      std::count(methods.begin(), methods.end(), Variant::NetOnly) > 0;
  const bool need_joint =
      std::count(methods.begin(), methods.end(), Variant::PifJoint) > 0;
  const bool need_pmf =
      std::count(methods.begin(), methods.end(), Variant::PifNet) > 0 ||
      std::count(methods.begin(), methods.end(), Variant::PifJoint) > 0;
  const int restarts = std::max(1, opts.n_restarts);
  if (need_net) {
    subs.network = best_of_restarts(
        [&](std::uint64_t seed) {
          FitOptions fit = opts.fit;
          fit.seed = seed;
          return fit_network(ds.adjacency, opts.K, opts.factor_prior, fit);
        },
        mix_seed(master_seed, kSeedNetworkFit), restarts);
  }
  if (need_pmf) {
    subs.pmf = best_of_restarts(
        [&](std::uint64_t seed) {
          FitOptions fit = opts.fit;
          fit.seed = seed;
          return fit_pmf(ds.x, opts.Q, opts.factor_prior, fit);
        },
        mix_seed(master_seed, kSeedPmfFit), restarts);
  }
  if (need_joint) {
    subs.joint = best_of_restarts(
        [&](std::uint64_t seed) {
          FitOptions fit = opts.fit;
          fit.seed = seed;
          return fit_joint(ds.adjacency, ds.x, opts.K, opts.factor_prior, fit);
        },
        mix_seed(master_seed, kSeedJointFit), restarts);
  }
  subs.runtime_sec = seconds_since(start);
  return subs;
}

InfluencePosterior best_posterior_of(
    const std::function<InfluencePosterior(std::uint64_t)>& fit_once,
    std::uint64_t base_seed, int n_restarts) {
  InfluencePosterior best = fit_once(base_seed);
  for (int r = 1; r < n_restarts; ++r) {
    InfluencePosterior candidate = fit_once(mix_seed(base_seed, 8000 + r));
    if (!candidate.elbo_trace.empty() && !best.elbo_trace.empty() &&
        candidate.elbo_trace.back() > best.elbo_trace.back()) {
      best = std::move(candidate);
    }
  }
  return best;
}

FittedMethod fit_variant(const Dataset& ds, const SubstituteSet& subs,
                         Variant variant, const MethodOptions& opts,
                         std::uint64_t master_seed) {
  FittedMethod out;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base_seed =
      mix_seed(master_seed, kSeedOutcome + static_cast<std::uint64_t>(variant));
  const int restarts = std::max(1, opts.n_restarts);
  if (variant == Variant::Mspf) {
    out.posterior = best_posterior_of(
        [&](std::uint64_t seed) {
          FitOptions fit = opts.fit;
          fit.seed = seed;
          return fit_mspf(ds.y, ds.adjacency, ds.x, opts.Q, opts.priors, fit);
        },
        base_seed, restarts);
    out.inputs.y = &ds.y;
    out.inputs.adj = &ds.adjacency;
    out.inputs.x = &ds.x;
    out.inputs.binarize_exposure = false;
  } else {
    OutcomeInputs in;
    in.y = &ds.y;
    in.adj = &ds.adjacency;
    in.x = &ds.x;
    in.binarize_exposure = opts.binarize_exposure;
    switch (variant) {
      case Variant::PifNet:
        in.u_bar = subs.network->c_hat;
        in.w_bar = subs.pmf->w_hat;
        break;
      case Variant::PifJoint:
        in.u_bar = subs.joint->c_hat;
        in.w_bar = subs.pmf->w_hat;
        break;
      case Variant::Oracle:
        if (!ds.truth) throw DataError("oracle requires ground-truth confounders");
        in.u_bar = ds.truth->rho;
        in.w_bar = ds.truth->tau;
        break;
      case Variant::NetOnly:
        in.u_bar = subs.network->c_hat;
        break;
      case Variant::Unadjusted:
        break;
      case Variant::Mspf:
        break;
    }
    out.posterior = best_posterior_of(
        [&](std::uint64_t seed) {
          FitOptions fit = opts.fit;
          fit.seed = seed;
          return fit_outcome(in, variant, opts.priors, fit);
        },
        base_seed, restarts);
    out.inputs = std::move(in);
  }
  out.runtime_sec = seconds_since(start);
  return out;
}

}  // namespace

nlohmann::json method_options_to_json(const MethodOptions& o) {
  return {
      {"K", o.K},
      {"Q", o.Q},
      {"factor_prior", {{"shape", o.factor_prior.shape}, {"rate", o.factor_prior.rate}}},
      {"loading_prior", {{"shape", o.priors.loading.shape}, {"rate", o.priors.loading.rate}}},
      {"influence_prior",
       {{"shape", o.priors.influence.shape}, {"rate", o.priors.influence.rate}}},
      {"binarize_exposure", o.binarize_exposure},
      {"n_restarts", o.n_restarts},
      {"fit_threads", o.fit.threads},
      {"max_sweeps", o.fit.max_sweeps},
      {"elbo_rel_tol", o.fit.elbo_rel_tol},
      {"elbo_check_every", o.fit.elbo_check_every},
      {"rate_floor", o.fit.rate_floor},
      {"init_jitter", o.fit.init_jitter},
      {"threads", o.threads},
  };
}

MethodOptions method_options_from_json(const nlohmann::json& j) {
  MethodOptions o;
  o.K = j.value("K", o.K);
  o.Q = j.value("Q", o.Q);
  if (j.contains("factor_prior")) {
    o.factor_prior.shape = j.at("factor_prior").at("shape").get<double>();
    o.factor_prior.rate = j.at("factor_prior").at("rate").get<double>();
  }
  if (j.contains("loading_prior")) {
    o.priors.loading.shape = j.at("loading_prior").at("shape").get<double>();
    o.priors.loading.rate = j.at("loading_prior").at("rate").get<double>();
  }
  if (j.contains("influence_prior")) {
    o.priors.influence.shape = j.at("influence_prior").at("shape").get<double>();
    o.priors.influence.rate = j.at("influence_prior").at("rate").get<double>();
  }
  o.binarize_exposure = j.value("binarize_exposure", o.binarize_exposure);
  o.n_restarts = j.value("n_restarts", o.n_restarts);
  o.fit.threads = j.value("fit_threads", o.fit.threads);
  o.fit.max_sweeps = j.value("max_sweeps", o.fit.max_sweeps);
  o.fit.elbo_rel_tol = j.value("elbo_rel_tol", o.fit.elbo_rel_tol);
  o.fit.elbo_check_every = j.value("elbo_check_every", o.fit.elbo_check_every);
  o.fit.rate_floor = j.value("rate_floor", o.fit.rate_floor);
  o.fit.init_jitter = j.value("init_jitter", o.fit.init_jitter);
  o.threads = j.value("threads", o.threads);
  return o;
}

CompareReport run_compare(const Dataset& ds, const SimConfig& cfg,
                          const std::vector<Variant>& methods,
                          const MethodOptions& opts, std::uint64_t master_seed) {
  if (methods.empty()) throw ConfigError("compare: the methods list is empty");
  if (!ds.truth) throw DataError("compare: dataset has no ground truth");

  DropResult dropped = drop_isolated(ds);
  const Dataset& data = dropped.dataset;
  const int n_dropped = ds.adjacency.n_persons() - data.adjacency.n_persons();
  const SubstituteSet subs = fit_substitutes(data, methods, opts, master_seed);

  CompareReport report;
  for (Variant variant : methods) {
    FittedMethod fitted = fit_variant(data, subs, variant, opts, master_seed);
    const InfluenceEstimates est = estimate_influence(fitted.posterior);
    std::vector<double> est_kept, truth_kept;
    double mean_hat = 0.0, mean_true = 0.0;
    for (std::size_t j = 0; j < est.beta_hat.size(); ++j) {
      if (est.no_peers[j]) continue;
      est_kept.push_back(est.beta_hat[j]);
      truth_kept.push_back(data.truth->beta[j]);
    }
    if (est_kept.empty()) throw DataError("compare: no persons with exposure evidence");
    for (std::size_t t = 0; t < est_kept.size(); ++t) {
      mean_hat += est_kept[t];
      mean_true += truth_kept[t];
    }
    mean_hat /= static_cast<double>(est_kept.size());
    mean_true /= static_cast<double>(est_kept.size());

    CompareRow row;
    row.method = to_string(variant);
    row.setting = to_string(cfg.setting);
    row.level = to_string(cfg.level);
    row.seed = cfg.seed;
    row.mse = influence_mse(est_kept, truth_kept);
    row.mse_x1e3 = row.mse * 1e3;
    row.mean_beta_hat = mean_hat;
    row.mean_beta_true = mean_true;
    row.n_excluded = static_cast<int>(est.beta_hat.size() - est_kept.size());
    row.n_dropped = n_dropped;
    row.n_unexplained = fitted.posterior.n_unexplained;
    row.converged = fitted.posterior.converged;
    row.runtime_sec = fitted.runtime_sec;
    report.rows.push_back(std::move(row));
  }

  std::vector<std::string> method_names;
  for (Variant v : methods) method_names.push_back(to_string(v));
  report.manifest = {{"command", "compare"},
                     {"config", sim_config_to_json(cfg)},
                     {"methods", method_names},
                     {"options", method_options_to_json(opts)},
                     {"seed", master_seed}};
  return report;
}

InfluencePosterior fit_method(const Dataset& ds, Variant variant,
                              const MethodOptions& opts, std::uint64_t master_seed) {
  const SubstituteSet subs = fit_substitutes(ds, {variant}, opts, master_seed);
  return fit_variant(ds, subs, variant, opts, master_seed).posterior;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<CompareRow>& rows) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const CompareRow*>>
      cells;
  for (const auto& r : rows) cells[{r.method, r.setting, r.level}].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : cells) {
    AggregateRow agg;
    agg.method = std::get<0>(key);
    agg.setting = std::get<1>(key);
    agg.level = std::get<2>(key);
    agg.n_seeds = static_cast<int>(members.size());
    const double n = static_cast<double>(members.size());
    for (const auto* r : members) {
      agg.mse_mean += r->mse;
      agg.mse_x1e3_mean += r->mse_x1e3;
      agg.converged_frac += r->converged ? 1.0 : 0.0;
      agg.runtime_mean_sec += r->runtime_sec;
    }
    agg.mse_mean /= n;
    agg.mse_x1e3_mean /= n;
    agg.converged_frac /= n;
    agg.runtime_mean_sec /= n;
    if (members.size() > 1) {
      double var = 0.0, var3 = 0.0;
      for (const auto* r : members) {
        var += (r->mse - agg.mse_mean) * (r->mse - agg.mse_mean);
        var3 += (r->mse_x1e3 - agg.mse_x1e3_mean) * (r->mse_x1e3 - agg.mse_x1e3_mean);
      }
      var /= n - 1.0;
      var3 /= n - 1.0;
      agg.mse_se = std::sqrt(var / n);
      agg.mse_x1e3_se = std::sqrt(var3 / n);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

SweepReport run_sweep(const SimConfig& base, const std::vector<Setting>& settings,
                      const std::vector<Level>& levels,
                      const std::vector<std::uint64_t>& seeds,
                      const std::vector<Variant>& methods, const MethodOptions& opts) {
  if (settings.empty() || levels.empty() || seeds.empty()) {
    throw ConfigError("sweep: settings, levels, and seeds must be nonempty");
  }
  {
    std::vector<std::uint64_t> sorted(seeds);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("sweep: duplicate seeds");
    }
  }
  struct Cell {
    Setting setting;
    Level level;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Setting s : settings) {
    for (Level l : levels) {
      for (std::uint64_t seed : seeds) cells.push_back({s, l, seed});
    }
  }
  std::vector<std::vector<CompareRow>> cell_rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), opts.threads, [&](int t) {
    SimConfig cfg = base;
    cfg.setting = cells[t].setting;
    cfg.level = cells[t].level;
    cfg.seed = cells[t].seed;
    const Dataset ds = simulate_dataset(cfg);
    cell_rows[t] = run_compare(ds, cfg, methods, opts, cells[t].seed).rows;
  });

  SweepReport report;
  for (auto& rows : cell_rows) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const CompareRow& a, const CompareRow& b) {
              return std::tie(a.setting, a.level, a.seed, a.method) <
                     std::tie(b.setting, b.level, b.seed, b.method);
            });
  report.aggregates = aggregate_rows(report.rows);

  std::vector<std::string> setting_names, level_names, method_names;
  for (Setting s : settings) setting_names.push_back(to_string(s));
  for (Level l : levels) level_names.push_back(to_string(l));
  for (Variant v : methods) method_names.push_back(to_string(v));
  report.manifest = {{"command", "sweep"},
                     {"config", sim_config_to_json(base)},
                     {"settings", setting_names},
                     {"levels", level_names},
                     {"seeds", seeds},
                     {"methods", method_names},
                     {"options", method_options_to_json(opts)}};
  return report;
}

SensitivityReport run_sensitivity(const SimConfig& base,
                                  const std::vector<double>& strengths,
                                  double frac_pairs, int n_shared_items,
                                  const std::vector<std::uint64_t>& seeds,
                                  const MethodOptions& opts) {
  if (strengths.empty()) throw ConfigError("sensitivity: empty strength grid");
  if (seeds.empty()) throw ConfigError("sensitivity: empty seeds");
  struct Cell {
    double strength;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double s : strengths) {
    for (std::uint64_t seed : seeds) cells.push_back({s, seed});
  }
  std::vector<SensitivityRow> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), opts.threads, [&](int t) {
    SimConfig cfg = base;
    cfg.seed = cells[t].seed;
    cfg.violation = ViolationConfig{frac_pairs, n_shared_items, cells[t].strength};
    const Dataset ds = simulate_dataset(cfg);
    const auto report =
        run_compare(ds, cfg, {Variant::PifJoint}, opts, cells[t].seed);
    SensitivityRow row;
    row.strength = cells[t].strength;
    row.seed = cells[t].seed;
    row.mse = report.rows[0].mse;
    row.mse_x1e3 = report.rows[0].mse_x1e3;
    row.converged = report.rows[0].converged;
    row.runtime_sec = report.rows[0].runtime_sec;
    rows[t] = row;
  });

  SensitivityReport report;
  report.rows = std::move(rows);
  std::sort(report.rows.begin(), report.rows.end(),
            [](const SensitivityRow& a, const SensitivityRow& b) {
              return std::tie(a.strength, a.seed) < std::tie(b.strength, b.seed);
            });
  report.strengths = strengths;
  const double n = static_cast<double>(seeds.size());
  for (double s : strengths) {
    double mean = 0.0;
    for (const auto& r : report.rows) {
      if (r.strength == s) mean += r.mse;
    }
    mean /= n;
    double var = 0.0;
    for (const auto& r : report.rows) {
      if (r.strength == s) var += (r.mse - mean) * (r.mse - mean);
    }
    report.mse_mean.push_back(mean);
    report.mse_se.push_back(seeds.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0);
  }
  report.monotone_trend = true;
  for (std::size_t t = 1; t < report.mse_mean.size(); ++t) {
    if (report.mse_mean[t] < report.mse_mean[t - 1]) report.monotone_trend = false;
  }
  report.manifest = {{"command", "sensitivity"},
                     {"config", sim_config_to_json(base)},
                     {"strengths", strengths},
                     {"frac_pairs", frac_pairs},
                     {"n_shared_items", n_shared_items},
                     {"seeds", seeds},
                     {"options", method_options_to_json(opts)},
                     {"monotone_trend", report.monotone_trend}};
  return report;
}

PpcReport run_ppc_command(const Dataset& ds, FactorKind kind,
                          const std::vector<int>& k_list, double holdout_fraction,
                          int n_replicates, const MethodOptions& opts,
                          std::uint64_t seed) {
  if (k_list.empty()) throw ConfigError("ppc: empty K list");
  for (int k : k_list) {
    if (k < 1) throw ConfigError("ppc: K must be positive, got " + std::to_string(k));
  }
  PpcReport report;
  // One shared split per data side so every K sees the same mask.
  Rng split_rng(mix_seed(seed, kSeedPpc));
  const bool needs_network = kind != FactorKind::Pmf;
  const bool needs_counts = kind != FactorKind::Network;
  std::optional<HoldoutSplit> net_split;
  std::optional<SparseAdjacency> train_adj;
  if (needs_network) {
    net_split = holdout_split(adjacency_to_counts(ds.adjacency), holdout_fraction,
                              split_rng);
    train_adj = counts_to_adjacency(net_split->train);
  }
  std::optional<HoldoutSplit> x_split;
  if (needs_counts) {
    x_split = holdout_split(ds.x, holdout_fraction, split_rng);
  }

  for (int K : k_list) {
    FitOptions fit = opts.fit;
    fit.seed = mix_seed(seed, mix_seed(kSeedPpc, K));
    Rng ppc_rng(mix_seed(seed, mix_seed(kSeedPpc + 1, K)));
    if (kind == FactorKind::Network) {
      FactorFit f = fit_network(*train_adj, K, opts.factor_prior, fit);
      PpcRow row{to_string(kind), K, "network",
                 run_ppc(f, ds.adjacency, net_split->mask, n_replicates, ppc_rng),
                 false};
      row.warn_outside_band = row.result.p_value < 0.1 || row.result.p_value > 0.9;
      report.rows.push_back(std::move(row));
    } else if (kind == FactorKind::Pmf) {
      FactorFit f = fit_pmf(x_split->train, K, opts.factor_prior, fit);
      PpcRow row{to_string(kind), K, "purchases",
                 run_ppc(f, ds.x, x_split->mask, n_replicates, ppc_rng), false};
      row.warn_outside_band = row.result.p_value < 0.1 || row.result.p_value > 0.9;
      report.rows.push_back(std::move(row));
    } else {
      FactorFit f = fit_joint(*train_adj, x_split->train, K, opts.factor_prior, fit);
      PpcRow net_row{to_string(kind), K, "network",
                     run_ppc(f, ds.adjacency, net_split->mask, n_replicates, ppc_rng),
                     false};
      net_row.warn_outside_band =
          net_row.result.p_value < 0.1 || net_row.result.p_value > 0.9;
      report.rows.push_back(std::move(net_row));
      PpcRow x_row{to_string(kind), K, "purchases",
                   run_ppc(f, ds.x, x_split->mask, n_replicates, ppc_rng), false};
      x_row.warn_outside_band =
          x_row.result.p_value < 0.1 || x_row.result.p_value > 0.9;
      report.rows.push_back(std::move(x_row));
    }
  }
  report.manifest = {{"command", "ppc"},
                     {"model", to_string(kind)},
                     {"k_list", k_list},
                     {"holdout_fraction", holdout_fraction},
                     {"n_replicates", n_replicates},
                     {"seed", seed},
                     {"options", method_options_to_json(opts)}};
  return report;
}

EvaluateReport run_evaluate(const Dataset& ds, const SimConfig& cfg,
                            const std::vector<Variant>& methods,
                            double holdout_fraction, const MethodOptions& opts,
                            std::uint64_t seed) {
  if (methods.empty()) throw ConfigError("evaluate: the methods list is empty");
  DropResult dropped = drop_isolated(ds);
  Dataset data = std::move(dropped.dataset);

  Rng rng(mix_seed(seed, kSeedEvaluate));
  HoldoutSplit split = holdout_split(data.y, holdout_fraction, rng);
  std::vector<HeldoutEntry> heldout;
  for (const auto& [i, k] : split.mask) {
    heldout.push_back({i, k, data.y.at(i, k)});
  }
  // scored set for the AUC: held-out positives plus as many zero cells
  std::vector<std::pair<int, int>> zero_cells;
  long attempts = 0;
  const long max_attempts = 200 * static_cast<long>(split.mask.size()) + 1000;
  while (zero_cells.size() < split.mask.size()) {
    if (++attempts > max_attempts) {
      throw DataError("evaluate: could not sample zero cells; matrix too dense");
    }
    const int i = static_cast<int>(rng.below(data.y.n_rows()));
    const int k = static_cast<int>(rng.below(data.y.n_cols()));
    if (data.y.at(i, k) == 0) zero_cells.emplace_back(i, k);
  }

  Dataset train = data;
  train.y = split.train;
  const SubstituteSet subs = fit_substitutes(train, methods, opts, seed);

  EvaluateReport report;
  for (Variant variant : methods) {
    FittedMethod fitted = fit_variant(train, subs, variant, opts, seed);
    ExposureIndex exposure(train.adjacency, train.x, opts.binarize_exposure);
    const auto rate = [&](int i, int k) {
      return outcome_rate(fitted.posterior, fitted.inputs, exposure, i, k);
    };
    EvaluateRow row;
    row.method = to_string(variant);
    const InfluenceEstimates est = estimate_influence(fitted.posterior);
    double mean_inf = 0.0;
    int kept = 0;
    for (std::size_t j = 0; j < est.beta_hat.size(); ++j) {
      if (est.no_peers[j]) continue;
      mean_inf += est.beta_hat[j];
      ++kept;
    }
    row.mean_influence = kept > 0 ? mean_inf / kept : 0.0;
    row.n_excluded = static_cast<int>(est.beta_hat.size()) - kept;
    row.hol = heldout_loglik(rate, heldout);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& e : heldout) {
      scores.push_back(rate(e.row, e.col));
      labels.push_back(1);
    }
    for (const auto& [i, k] : zero_cells) {
      scores.push_back(rate(i, k));
      labels.push_back(0);
    }
    row.auc_score = auc(scores, labels);
    row.converged = fitted.posterior.converged;
    row.runtime_sec = fitted.runtime_sec;
    report.rows.push_back(std::move(row));
  }

  // 1/m_i reference predictor
  {
    const auto rate = baseline_rates(train.x);
    EvaluateRow row;
    row.method = "baseline";
    row.hol = heldout_loglik(rate, heldout);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& e : heldout) {
      scores.push_back(rate(e.row, e.col));
      labels.push_back(1);
    }
    for (const auto& [i, k] : zero_cells) {
      scores.push_back(rate(i, k));
      labels.push_back(0);
    }
    row.auc_score = auc(scores, labels);
    report.rows.push_back(std::move(row));
  }

  std::vector<std::string> method_names;
  for (Variant v : methods) method_names.push_back(to_string(v));
  report.manifest = {{"command", "evaluate"},
                     {"config", sim_config_to_json(cfg)},
                     {"methods", method_names},
                     {"holdout_fraction", holdout_fraction},
                     {"seed", seed},
                     {"options", method_options_to_json(opts)}};
  return report;
}

namespace {

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "method,setting,level,seed,mse,mse_x1e3,mean_beta_hat,mean_beta_true,"
         "n_excluded,n_dropped,n_unexplained,converged,runtime_sec\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.setting << "," << r.level << "," << r.seed << ","
        << format_double(r.mse) << "," << format_double(r.mse_x1e3) << ","
        << format_double(r.mean_beta_hat) << "," << format_double(r.mean_beta_true)
        << "," << r.n_excluded << "," << r.n_dropped << "," << r.n_unexplained << ","
        << bool_str(r.converged) << "," << format_double(r.runtime_sec) << "\n";
  }
  return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "method,setting,level,n_seeds,mse_mean,mse_se,mse_x1e3_mean,mse_x1e3_se,"
         "converged_frac,runtime_mean_sec\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.setting << "," << r.level << "," << r.n_seeds << ","
        << format_double(r.mse_mean) << "," << format_double(r.mse_se) << ","
        << format_double(r.mse_x1e3_mean) << "," << format_double(r.mse_x1e3_se)
        << "," << format_double(r.converged_frac) << ","
        << format_double(r.runtime_mean_sec) << "\n";
  }
  return out.str();
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::ostringstream out;
  out << "strength,seed,mse,mse_x1e3,converged,runtime_sec\n";
  for (const auto& r : rows) {
    out << format_double(r.strength) << "," << r.seed << "," << format_double(r.mse)
        << "," << format_double(r.mse_x1e3) << "," << bool_str(r.converged) << ","
        << format_double(r.runtime_sec) << "\n";
  }
  return out.str();
}

std::string ppc_csv(const std::vector<PpcRow>& rows) {
  std::ostringstream out;
  out << "model,K,check,p_value,d_heldout,d_rep_mean,d_rep_sd,n_replicates,"
         "warn_outside_band\n";
  for (const auto& r : rows) {
    const auto j = r.result.to_json();
    out << r.model << "," << r.K << "," << r.check << ","
        << format_double(r.result.p_value) << "," << format_double(r.result.d_heldout)
        << "," << format_double(j.at("d_rep_mean").get<double>()) << ","
        << format_double(j.at("d_rep_sd").get<double>()) << "," << r.result.n_replicates
        << "," << bool_str(r.warn_outside_band) << "\n";
  }
  return out.str();
}

std::string evaluate_csv(const std::vector<EvaluateRow>& rows) {
  std::ostringstream out;
  out << "method,mean_influence,n_excluded,hol,auc,converged,runtime_sec\n";
  for (const auto& r : rows) {
    out << r.method << "," << format_double(r.mean_influence) << "," << r.n_excluded
        << "," << format_double(r.hol) << "," << format_double(r.auc_score) << ","
        << bool_str(r.converged) << "," << format_double(r.runtime_sec) << "\n";
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace pif

#ifndef PIF_EXPERIMENT_HPP
#define PIF_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pif/dataset.hpp"
#include "pif/influence.hpp"
#include "pif/metrics.hpp"
#include "pif/model_check.hpp"
#include "pif/simulator.hpp"

namespace pif {

struct MethodOptions {
  int K = 5;  // community factors
  int Q = 5;  // purchase factors
  GammaPrior factor_prior{0.1, 0.1};
  OutcomePriors priors;
  bool binarize_exposure = false;
  FitOptions fit;
  int threads = 1;      // worker pool width for grid cells
  int n_restarts = 3;   // substitute fits per model, best ELBO kept
};

nlohmann::json method_options_to_json(const MethodOptions& o);
MethodOptions method_options_from_json(const nlohmann::json& j);

struct CompareRow {
  std::string method;
  std::string setting;
  std::string level;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double mse_x1e3 = 0.0;
  double mean_beta_hat = 0.0;
  double mean_beta_true = 0.0;
  int n_excluded = 0;    // persons without exposure evidence, left out of MSE
  int n_dropped = 0;     // isolated persons removed before fitting
  long n_unexplained = 0;
  bool converged = false;
  double runtime_sec = 0.0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  nlohmann::json manifest;
};

// Fits the requested variants on one dataset (truth required for the MSE)
// and reports per-method accuracy. Factor fits are shared across variants
// that need the same substitutes.
CompareReport run_compare(const Dataset& ds, const SimConfig& cfg,
                          const std::vector<Variant>& methods,
                          const MethodOptions& opts, std::uint64_t master_seed);

// One method end to end (substitute fits included), no truth needed.
InfluencePosterior fit_method(const Dataset& ds, Variant variant,
                              const MethodOptions& opts, std::uint64_t master_seed);

struct AggregateRow {
  std::string method;
  std::string setting;
  std::string level;
  int n_seeds = 0;
  double mse_mean = 0.0;
  double mse_se = 0.0;
  double mse_x1e3_mean = 0.0;
  double mse_x1e3_se = 0.0;
  double converged_frac = 0.0;
  double runtime_mean_sec = 0.0;
};

struct SweepReport {
  std::vector<CompareRow> rows;
  std::vector<AggregateRow> aggregates;
  nlohmann::json manifest;
};

// settings x levels x seeds grid; each cell simulates a dataset and runs the
// comparison. Cells execute in a worker pool and the output ordering is
// independent of scheduling.
SweepReport run_sweep(const SimConfig& base, const std::vector<Setting>& settings,
                      const std::vector<Level>& levels,
                      const std::vector<std::uint64_t>& seeds,
                      const std::vector<Variant>& methods, const MethodOptions& opts);

std::vector<AggregateRow> aggregate_rows(const std::vector<CompareRow>& rows);

struct SensitivityRow {
  double strength = 0.0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double mse_x1e3 = 0.0;
  bool converged = false;
  double runtime_sec = 0.0;
};

struct SensitivityReport {
  std::vector<SensitivityRow> rows;
  // aggregate MSE per strength, in grid order
  std::vector<double> strengths;
  std::vector<double> mse_mean;
  std::vector<double> mse_se;
  bool monotone_trend = false;  // aggregate MSE nondecreasing along the grid
  nlohmann::json manifest;
};

SensitivityReport run_sensitivity(const SimConfig& base,
                                  const std::vector<double>& strengths,
                                  double frac_pairs, int n_shared_items,
                                  const std::vector<std::uint64_t>& seeds,
                                  const MethodOptions& opts);

struct PpcRow {
  std::string model;  // network | pmf | joint
  int K = 0;
  std::string check;  // network | purchases
  PpcResult result;
  bool warn_outside_band = false;  // outside [0.1, 0.9]
};

struct PpcReport {
  std::vector<PpcRow> rows;
  nlohmann::json manifest;
};

PpcReport run_ppc_command(const Dataset& ds, FactorKind kind,
                          const std::vector<int>& k_list, double holdout_fraction,
                          int n_replicates, const MethodOptions& opts,
                          std::uint64_t seed);

struct EvaluateRow {
  std::string method;  // variant name or "baseline"
  double mean_influence = 0.0;
  int n_excluded = 0;
  double hol = 0.0;
  double auc_score = 0.0;
  bool converged = true;
  double runtime_sec = 0.0;
};

struct EvaluateReport {
  std::vector<EvaluateRow> rows;
  nlohmann::json manifest;
};

// Holds out a fraction of today's purchases, refits each method on the rest,
// and scores held-out prediction: mean Poisson log likelihood over held-out
// entries and AUC against an equal number of rng-sampled zero cells.
EvaluateReport run_evaluate(const Dataset& ds, const SimConfig& cfg,
                            const std::vector<Variant>& methods,
                            double holdout_fraction, const MethodOptions& opts,
                            std::uint64_t seed);

// CSV emission; schemas are pinned by golden tests.
std::string compare_csv(const std::vector<CompareRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);
std::string ppc_csv(const std::vector<PpcRow>& rows);
std::string evaluate_csv(const std::vector<EvaluateRow>& rows);

void write_text(const std::string& path, const std::string& content);

}  // namespace pif

#endif

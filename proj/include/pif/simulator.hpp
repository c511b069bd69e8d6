#ifndef PIF_SIMULATOR_HPP
#define PIF_SIMULATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pif/dataset.hpp"
#include "pif/gamma.hpp"
#include "pif/rng.hpp"

namespace pif {

enum class Setting { Item, Homophily, Both };
enum class Level { Low, Med, High };

std::string to_string(Setting s);
std::string to_string(Level l);
Setting setting_from_string(const std::string& s);
Level level_from_string(const std::string& s);

struct NetworkSourceConfig {
  enum class Kind { Sbm, External };
  Kind kind = Kind::Sbm;
  int blocks = 0;  // 0 -> number of regions
  double p_in = 0.05;
  double p_out = 0.005;
  std::string path;  // external edgelist
};

struct ViolationConfig {
  double frac_pairs = 0.3;
  int n_shared_items = 0;
  double strength = 1.0;
};

struct SimConfig {
  int n_persons = 300;
  int n_items = 300;
  int n_regions = 0;  // 0 -> factors_per_side
  int n_groups = 0;
  int factors_per_side = 5;
  double base_shape = 0.25;
  double base_rate = 0.5;
  double s_rho = 50.0;
  double s_tau = 50.0;
  double s_gamma = 0.0;  // 0 -> level mapping
  double s_alpha = 0.0;
  Setting setting = Setting::Both;
  Level level = Level::Med;
  bool zero_influence = false;
  GammaPrior influence_prior{0.005, 0.1};
  NetworkSourceConfig network;
  std::optional<ViolationConfig> violation;
  std::uint64_t seed = 1;

  int regions() const { return n_regions > 0 ? n_regions : factors_per_side; }
  int groups() const { return n_groups > 0 ? n_groups : factors_per_side; }
  int sbm_blocks() const { return network.blocks > 0 ? network.blocks : regions(); }
  // Confounding level maps to {10, 50, 100} unless overridden.
  double effective_s_gamma() const;
  double effective_s_alpha() const;
};

nlohmann::json sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

struct SimCovariates {
  std::vector<int> person_region;
  std::vector<int> item_region;
  std::vector<int> person_group;
  std::vector<int> item_group;
};

// Even contiguous blocks, within-block pairs wired with p_in, cross with p_out.
SparseAdjacency generate_sbm(int n, int blocks, double p_in, double p_out, Rng& rng);
int sbm_block_of(int node, int n, int blocks);

// Person regions follow the SBM block ids when given; item regions and all
// group labels are uniform draws.
SimCovariates simulate_covariates(const SimConfig& cfg,
                                  const std::vector<int>* sbm_blocks, Rng& rng);

// Gamma mixtures selected by the one-hot covariates: the matching component
// draws Gam(a, b), the rest Gam(a/s, b).
SimTruth simulate_latents(const SimConfig& cfg, const SimCovariates& cov, Rng& rng);

Vec simulate_influence(const SimConfig& cfg, Rng& rng);

CountMatrix simulate_purchases(const SimConfig& cfg, const SimTruth& truth, Rng& rng);

CountMatrix simulate_outcomes(const SimConfig& cfg, const SimTruth& truth,
                              const SparseAdjacency& adj, const CountMatrix& x,
                              Rng& rng);

// Adds a shared additive preference of size strength * base_mean on
// n_shared_items rng-chosen items to both endpoints of each selected edge.
// The preference grids stay untouched; the bumps ride separately in truth.
void inject_violation(SimTruth& truth, const SparseAdjacency& adj,
                      double frac_pairs, int n_shared_items, double strength,
                      double base_mean, Rng& rng);

// Base purchase rate of person i over all items, bumps included.
Vec mu_row(Setting setting, const SimTruth& truth, int i);
// Outcome rate of person j: mu plus the peer exposure term.
Vec outcome_rate_row(Setting setting, const SimTruth& truth,
                     const SparseAdjacency& adj, const CountMatrix& x, int j);

Dataset simulate_dataset(const SimConfig& cfg);

// Dataset directory: manifest.json, adjacency.tsv, x.tsv, y.tsv,
// truth_persons.tsv, truth_items.tsv (+ violation.tsv when present).
void write_dataset(const Dataset& ds, const SimConfig& cfg, const std::string& dir);
Dataset load_dataset(const std::string& dir);
SimConfig load_dataset_config(const std::string& dir);

Grid one_hot(const std::vector<int>& ids, int n_classes);

}  // namespace pif

#endif

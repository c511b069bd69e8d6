#ifndef PIF_MODEL_CHECK_HPP
#define PIF_MODEL_CHECK_HPP

#include <set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"
#include "pif/factor_models.hpp"
#include "pif/rng.hpp"

namespace pif {

// Posterior predictive check at posterior-mean rates. The discrepancy is the
// mean held-out Poisson log likelihood; replicates redraw the masked
// positions from the fitted rates.
struct PpcResult {
  double p_value = 0.0;   // #{d_rep > d_heldout} / n_replicates
  double d_heldout = 0.0;
  std::vector<double> d_rep;
  int n_replicates = 0;

  nlohmann::json to_json() const;
};

// Core routine over (rate, observed count) pairs at the masked positions.
PpcResult run_ppc_cells(const std::vector<std::pair<double, long>>& cells,
                        int n_replicates, Rng& rng);

// Count-matrix check: `full` supplies the held-out values at the masked
// positions; the fit must have been trained on the matching train split.
PpcResult run_ppc(const FactorFit& fit, const CountMatrix& full,
                  const std::set<std::pair<int, int>>& mask, int n_replicates,
                  Rng& rng);

// Network check: masked pairs are held-out connections (value 1).
PpcResult run_ppc(const FactorFit& fit, const SparseAdjacency& full,
                  const std::set<std::pair<int, int>>& mask, int n_replicates,
                  Rng& rng);

}  // namespace pif

#endif

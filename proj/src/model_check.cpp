#include "pif/model_check.hpp"

#include <cmath>

#include "pif/errors.hpp"
#include "pif/special.hpp"

namespace pif {

nlohmann::json PpcResult::to_json() const {
  double rep_mean = 0.0;
  for (double d : d_rep) rep_mean += d;
  rep_mean /= d_rep.empty() ? 1.0 : static_cast<double>(d_rep.size());
  double rep_var = 0.0;
  for (double d : d_rep) rep_var += (d - rep_mean) * (d - rep_mean);
  if (d_rep.size() > 1) rep_var /= static_cast<double>(d_rep.size() - 1);
  return {{"p_value", p_value},
          {"d_heldout", d_heldout},
          {"d_rep_mean", rep_mean},
          {"d_rep_sd", std::sqrt(rep_var)},
          {"n_replicates", n_replicates}};
}

PpcResult run_ppc_cells(const std::vector<std::pair<double, long>>& cells,
                        int n_replicates, Rng& rng) {
  if (cells.empty()) throw DataError("run_ppc: empty heldout mask");
  if (n_replicates < 1) throw ConfigError("run_ppc: n_replicates must be >= 1");

  PpcResult result;
  result.n_replicates = n_replicates;
  const double denom = static_cast<double>(cells.size());

  double held = 0.0;
  for (const auto& [rate, value] : cells) held += poisson_loglik(value, rate);
  result.d_heldout = held / denom;

  result.d_rep.reserve(n_replicates);
  int exceed = 0;
  for (int r = 0; r < n_replicates; ++r) {
    // independent substream per replicate, so replicate order is immaterial
    Rng rep_rng(mix_seed(static_cast<std::uint64_t>(rng.engine()()), r));
    double d = 0.0;
    for (const auto& [rate, value] : cells) {
      d += poisson_loglik(rep_rng.poisson(rate), rate);
    }
    d /= denom;
    result.d_rep.push_back(d);
    if (d > result.d_heldout) ++exceed;
  }
  result.p_value = static_cast<double>(exceed) / static_cast<double>(n_replicates);
  return result;
}

PpcResult run_ppc(const FactorFit& fit, const CountMatrix& full,
                  const std::set<std::pair<int, int>>& mask, int n_replicates,
                  Rng& rng) {
  std::vector<std::pair<double, long>> cells;
  cells.reserve(mask.size());
  for (const auto& [i, k] : mask) {
    cells.emplace_back(factor_cell_rate(fit, i, k), full.at(i, k));
  }
  return run_ppc_cells(cells, n_replicates, rng);
}

PpcResult run_ppc(const FactorFit& fit, const SparseAdjacency& full,
                  const std::set<std::pair<int, int>>& mask, int n_replicates,
                  Rng& rng) {
  std::vector<std::pair<double, long>> cells;
  cells.reserve(mask.size());
  for (const auto& [i, j] : mask) {
    cells.emplace_back(factor_pair_rate(fit, i, j), full.has_edge(i, j) ? 1 : 0);
  }
  return run_ppc_cells(cells, n_replicates, rng);
}

}  // namespace pif

#ifndef PIF_FACTOR_MODELS_HPP
#define PIF_FACTOR_MODELS_HPP

#include <string>
#include <vector>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"
#include "pif/gamma.hpp"
#include "pif/grids.hpp"

namespace pif {

enum class FactorKind { Network, Pmf, Joint };

std::string to_string(FactorKind kind);
FactorKind factor_kind_from_string(const std::string& s);

// Fitted substitutes. c_hat holds the per-person community memberships
// (network and joint fits), d_hat the per-person PMF loadings, w_hat the
// per-item loadings (PMF and joint fits); unused grids stay empty.
struct FactorFit {
  FactorKind kind = FactorKind::Network;
  int K = 0;
  Grid c_hat;
  Grid d_hat;
  Grid w_hat;
  std::vector<double> elbo_trace;
  bool converged = false;
  GammaPrior prior;
  std::uint64_t seed = 0;
};

FactorFit fit_network(const SparseAdjacency& adj, int K, const GammaPrior& prior,
                      const FitOptions& opts);
FactorFit fit_pmf(const CountMatrix& x, int Q, const GammaPrior& prior,
                  const FitOptions& opts);
FactorFit fit_joint(const SparseAdjacency& adj, const CountMatrix& x, int K,
                    const GammaPrior& prior, const FitOptions& opts);

// Posterior-mean Poisson rate of the data the fit models; network fits use
// c_i . c_j over pairs, count fits d_i . w_k (or c_i . w_k for joint).
double factor_pair_rate(const FactorFit& fit, int i, int j);
double factor_cell_rate(const FactorFit& fit, int i, int k);

// TSV bundle plus JSON manifest in a directory.
void save_factor_fit(const FactorFit& fit, const std::string& dir);
FactorFit load_factor_fit(const std::string& dir);

}  // namespace pif

#endif

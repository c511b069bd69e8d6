#ifndef PIF_INFLUENCE_HPP
#define PIF_INFLUENCE_HPP

#include <string>
#include <vector>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"
#include "pif/exposure.hpp"
#include "pif/gamma.hpp"
#include "pif/grids.hpp"

namespace pif {

enum class Variant { PifNet, PifJoint, Oracle, Unadjusted, NetOnly, Mspf };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// Inputs to the outcome stage. u_bar carries the per-person adjustment
// covariates (substitutes, or the true confounders for the oracle run),
// w_bar the per-item ones; an empty grid drops the corresponding block.
struct OutcomeInputs {
  const CountMatrix* y = nullptr;
  const SparseAdjacency* adj = nullptr;
  const CountMatrix* x = nullptr;
  Grid u_bar;
  Grid w_bar;
  bool binarize_exposure = false;
};

struct OutcomePriors {
  GammaPrior loading{0.01, 10.0};   // alpha and gamma
  GammaPrior influence{0.1, 0.1};   // beta
};

struct InfluencePosterior {
  Variant variant = Variant::Unadjusted;
  GammaVariational beta;   // n x 1
  GammaVariational gamma;  // m x Kc; empty when the block is absent
  GammaVariational alpha;  // n x Kw
  GammaVariational z;      // n x K, mSPF's jointly learned preferences
  std::vector<double> elbo_trace;
  bool converged = false;
  std::vector<double> exposure_total;  // T_j, the fixed beta rate evidence
  std::vector<std::uint8_t> no_evidence;  // T_j == 0
  // Observations no rate component could explain. Only the exposure-only
  // model may produce these (they are skipped and counted); with adjustment
  // blocks present they raise ModelInconsistencyError instead.
  long n_unexplained = 0;
  OutcomePriors priors;
  std::uint64_t seed = 0;
};

InfluencePosterior fit_outcome(const OutcomeInputs& in, Variant variant,
                               const OutcomePriors& priors, const FitOptions& opts);

// Social Poisson factorization conditioned on yesterday's purchases: the
// per-person preferences z are latent and learned jointly with the item
// loadings instead of being supplied as covariates.
InfluencePosterior fit_mspf(const CountMatrix& y, const SparseAdjacency& adj,
                            const CountMatrix& x, int K,
                            const OutcomePriors& priors, const FitOptions& opts);

struct InfluenceEstimates {
  std::vector<double> beta_hat;
  std::vector<std::uint8_t> no_peers;
};
InfluenceEstimates estimate_influence(const InfluencePosterior& post);

// Posterior-mean outcome rate at a cell, for held-out evaluation.
double outcome_rate(const InfluencePosterior& post, const OutcomeInputs& in,
                    const ExposureIndex& exposure, int i, int k);

// beta.tsv (person, estimate, no-evidence flag) plus JSON manifest.
void save_influence(const InfluencePosterior& post, const std::string& dir);

}  // namespace pif

#endif

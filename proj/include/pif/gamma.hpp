#ifndef PIF_GAMMA_HPP
#define PIF_GAMMA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pif/grids.hpp"

namespace pif {

struct GammaPrior {
  double shape = 0.1;
  double rate = 0.1;

  double mean() const { return shape / rate; }
};

// Factorized Gamma variational posterior over a rows x factors grid.
struct GammaVariational {
  Grid shape;  // kappa
  Grid rate;   // nu

  GammaVariational() = default;
  GammaVariational(Eigen::Index rows, Eigen::Index cols, const GammaPrior& prior)
      : shape(Grid::Constant(rows, cols, prior.shape)),
        rate(Grid::Constant(rows, cols, prior.rate)) {}

  Eigen::Index rows() const { return shape.rows(); }
  Eigen::Index cols() const { return shape.cols(); }
};

// Entrywise posterior mean kappa / nu.
Grid gamma_mean(const GammaVariational& gv);

// Entrywise E[log theta] = Psi(kappa) - log(nu).
Grid gamma_elog(const GammaVariational& gv);

struct FitOptions {
  int max_sweeps = 500;
  double elbo_rel_tol = 1e-4;
  int elbo_check_every = 5;
  double rate_floor = 1e-10;
  std::uint64_t seed = 0;
  double init_jitter = 0.1;  // relative jitter on initial shapes
  int threads = 1;           // intra-fit parallelism; 1 is the determinism reference
};

// Normalizes exp(log_scores) into proportions phi with sum(phi) = 1.
// `count` is the total being split; the expected allocation is count * phi.
// If every score is -inf the split degenerates to uniform and, when given,
// *degenerate is set so callers can surface a diagnostic.
std::vector<double> allocate_multinomial(double count,
                                         std::span<const double> log_scores,
                                         bool* degenerate = nullptr);

// Relative-change stopping rule on the recorded ELBO trace.
bool check_convergence(std::span<const double> elbo_trace, const FitOptions& opts);

}  // namespace pif

#endif

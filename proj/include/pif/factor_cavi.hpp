#ifndef PIF_FACTOR_CAVI_HPP
#define PIF_FACTOR_CAVI_HPP

#include <vector>

#include "pif/adjacency.hpp"
#include "pif/cavi_util.hpp"
#include "pif/count_matrix.hpp"

namespace pif {

// Coordinate-ascent state machines for the three substitute factor models.
// Every update is an exact complete conditional, so the collapsed ELBO is
// nondecreasing sweep over sweep. Community rows appear in each other's
// rates and are therefore updated sequentially against running column sums;
// sides that are conditionally independent given the other are updated as
// one block.

struct ElboParts {
  double net_loglik = 0.0;   // edge terms minus pair rate sums
  double x_loglik = 0.0;     // count terms minus cell rate sums
  double prior_terms = 0.0;  // Gamma cross-entropy and entropy terms
  double total() const { return net_loglik + x_loglik + prior_terms; }
};

// a_ij ~ Pois(sum_q c_iq c_jq) over unordered pairs.
class NetworkCavi {
 public:
  NetworkCavi(const SparseAdjacency& adj, int K, const GammaPrior& prior,
              const FitOptions& opts);

  void run();
  void sweep();                // one allocation pass plus row updates
  double loglik_part() const;  // collapsed likelihood part of the ELBO
  ElboParts elbo_parts() const;

  LatentBlock c;
  std::vector<std::uint8_t> frozen;  // per-row clamp, used by conjugacy tests
  std::vector<double> elbo_trace;
  bool converged = false;
  mutable long degenerate_allocations = 0;

 private:
  void update_rows(const Grid& acc);
  double pass(Grid* acc) const;  // accumulates allocations when acc != nullptr

  const SparseAdjacency& adj_;
  FitOptions opts_;
};

// x_ik ~ Pois(sum_q d_iq w_kq).
class PmfCavi {
 public:
  PmfCavi(const CountMatrix& x, int Q, const GammaPrior& prior,
          const FitOptions& opts);

  void run();
  void sweep();
  double loglik_part() const;
  ElboParts elbo_parts() const;

  LatentBlock d;
  LatentBlock w;
  bool update_d = true;  // cleared by tests that clamp one side
  bool update_w = true;
  std::vector<double> elbo_trace;
  bool converged = false;
  mutable long degenerate_allocations = 0;

 private:
  void apply_updates(const Grid& acc_d, const Grid& acc_w);
  double pass(Grid* acc_d, Grid* acc_w) const;

  const CountMatrix& x_;
  FitOptions opts_;
  double log_fact_const_;
};

// a_ij ~ Pois(c_i . c_j), x_ik ~ Pois(c_i . w_k); c pools both likelihoods.
class JointCavi {
 public:
  JointCavi(const SparseAdjacency& adj, const CountMatrix& x, int K,
            const GammaPrior& prior, const FitOptions& opts);

  void run();
  void sweep();
  double loglik_part() const;
  ElboParts elbo_parts() const;

  LatentBlock c;
  LatentBlock w;
  std::vector<std::uint8_t> frozen;
  bool update_w = true;
  std::vector<double> elbo_trace;
  bool converged = false;
  mutable long degenerate_allocations = 0;

 private:
  void update_rows(const Grid& acc);
  void apply_w_update(const Grid& acc_w);
  double net_pass(Grid* acc) const;
  double x_pass(Grid* acc_c, Grid* acc_w) const;

  const SparseAdjacency& adj_;
  const CountMatrix& x_;
  FitOptions opts_;
  double log_fact_const_;
};

}  // namespace pif

#endif

#include "pif/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pif/special.hpp"

namespace pif {

Grid gamma_mean(const GammaVariational& gv) {
  return gv.shape.cwiseQuotient(gv.rate);
}

Grid gamma_elog(const GammaVariational& gv) {
  Grid out(gv.rows(), gv.cols());
  const double* k = gv.shape.data();
  const double* n = gv.rate.data();
  double* o = out.data();
  const Eigen::Index total = gv.shape.size();
  for (Eigen::Index t = 0; t < total; ++t) {
    o[t] = digamma(k[t]) - std::log(n[t]);
  }
  return out;
}

std::vector<double> allocate_multinomial(double count,
                                         std::span<const double> log_scores,
                                         bool* degenerate) {
  if (log_scores.empty()) {
    throw std::invalid_argument("allocate_multinomial: empty score vector");
  }
  if (count < 0.0) {
    throw std::invalid_argument("allocate_multinomial: negative count");
  }
  const double top = *std::max_element(log_scores.begin(), log_scores.end());
  std::vector<double> phi(log_scores.size());
  if (top == -std::numeric_limits<double>::infinity()) {
    if (degenerate != nullptr) *degenerate = true;
    std::fill(phi.begin(), phi.end(), 1.0 / static_cast<double>(phi.size()));
    return phi;
  }
  double total = 0.0;
  for (std::size_t t = 0; t < phi.size(); ++t) {
    phi[t] = std::exp(log_scores[t] - top);
    total += phi[t];
  }
  for (double& p : phi) p /= total;
  return phi;
}

bool check_convergence(std::span<const double> elbo_trace, const FitOptions& opts) {
  if (elbo_trace.empty()) {
    throw std::invalid_argument("check_convergence: empty trace");
  }
  if (static_cast<int>(elbo_trace.size()) >= opts.max_sweeps) return true;
  if (elbo_trace.size() < 2) return false;
  const double prev = elbo_trace[elbo_trace.size() - 2];
  const double curr = elbo_trace[elbo_trace.size() - 1];
  const double rel = std::abs((curr - prev) / (std::abs(prev) + opts.rate_floor));
  return rel < opts.elbo_rel_tol;
}

}  // namespace pif

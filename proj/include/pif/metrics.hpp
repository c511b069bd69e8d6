#ifndef PIF_METRICS_HPP
#define PIF_METRICS_HPP

#include <functional>
#include <span>
#include <vector>

#include "pif/count_matrix.hpp"

namespace pif {

// Mean squared error of influence estimates against simulated truth.
// Persons without exposure evidence are excluded by the caller.
double influence_mse(std::span<const double> est, std::span<const double> truth);

struct HeldoutEntry {
  int row;
  int col;
  long count;
};

// Mean Poisson log likelihood of the held-out entries at the given rates.
double heldout_loglik(const std::function<double(int, int)>& rate,
                      std::span<const HeldoutEntry> heldout);

// Per-person baseline: constant rate 1/m_i where m_i counts the items the
// person touched yesterday; epsilon for empty rows.
std::function<double(int, int)> baseline_rates(const CountMatrix& x,
                                               double epsilon = 1e-10);

// Mann-Whitney AUC with ties counted one half. Throws on single-class input.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace pif

#endif

#include "pif/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "pif/errors.hpp"
#include "pif/special.hpp"

namespace pif {

double influence_mse(std::span<const double> est, std::span<const double> truth) {
  if (est.size() != truth.size()) {
    throw DataError("influence_mse: length mismatch (" + std::to_string(est.size()) +
                    " vs " + std::to_string(truth.size()) + ")");
  }
  if (est.empty()) throw DataError("influence_mse: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double d = est[i] - truth[i];
    total += d * d;
  }
  return total / static_cast<double>(est.size());
}

double heldout_loglik(const std::function<double(int, int)>& rate,
                      std::span<const HeldoutEntry> heldout) {
  if (heldout.empty()) throw DataError("heldout_loglik: empty heldout set");
  double total = 0.0;
  for (const auto& e : heldout) {
    total += poisson_loglik(e.count, rate(e.row, e.col));
  }
  return total / static_cast<double>(heldout.size());
}

std::function<double(int, int)> baseline_rates(const CountMatrix& x, double epsilon) {
  std::vector<double> per_row(x.n_rows());
  for (int r = 0; r < x.n_rows(); ++r) {
    const int m_i = x.row_nnz(r);
    per_row[r] = m_i > 0 ? 1.0 / static_cast<double>(m_i) : epsilon;
  }
  return [per_row = std::move(per_row)](int i, int) { return per_row[i]; };
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auc: length mismatch");
  const long n_pos = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  const long n_neg = static_cast<long>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("auc: both classes must be present");
  }
  // rank-sum with average ranks over score ties
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] != 0) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      (static_cast<double>(n_pos) + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace pif

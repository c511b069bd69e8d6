#include "pif/factor_cavi.hpp"

#include <cmath>

#include "pif/errors.hpp"

namespace pif {

namespace {

// Pair rate sum over i < j: 0.5 * sum_q (S_q^2 - P_q) with S the column sums
// of the means and P the column sums of squared means.
double pair_rate_sum(const Grid& mean) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < mean.cols(); ++q) {
    const double s = mean.col(q).sum();
    const double p = mean.col(q).squaredNorm();
    total += 0.5 * (s * s - p);
  }
  return total;
}

double cross_rate_sum(const Grid& mean_a, const Grid& mean_b) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < mean_a.cols(); ++q) {
    total += mean_a.col(q).sum() * mean_b.col(q).sum();
  }
  return total;
}

double log_factorial_sum(const CountMatrix& x) {
  Kahan acc;
  for (const auto& e : x.entries()) {
    acc.add(std::lgamma(static_cast<double>(e.count) + 1.0));
  }
  return acc.value();
}

constexpr double kFloor = 1e-10;

// Splits one edge observation (a_ij = 1) across factors.
inline double edge_term(const LatentBlock& c, int i, int j, Grid* acc,
                        std::vector<double>& wgt, long& degenerate) {
  const Eigen::Index K = c.mean.cols();
  double s = 0.0;
  for (Eigen::Index q = 0; q < K; ++q) {
    wgt[q] = c.expelog(i, q) * c.expelog(j, q);
    s += wgt[q];
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    ++degenerate;
    if (acc != nullptr) {
      const double phi = 1.0 / static_cast<double>(K);
      for (Eigen::Index q = 0; q < K; ++q) {
        (*acc)(i, q) += phi;
        (*acc)(j, q) += phi;
      }
    }
    return std::log(kFloor);
  }
  if (acc != nullptr) {
    for (Eigen::Index q = 0; q < K; ++q) {
      const double phi = wgt[q] / s;
      (*acc)(i, q) += phi;
      (*acc)(j, q) += phi;
    }
  }
  return std::log(s);
}

// Splits one count observation across factors of a row block and a column
// block; returns its count * log(rate tilde) contribution.
inline double count_term(const LatentBlock& rows, const LatentBlock& cols,
                         const CountEntry& e, Grid* acc_r, Grid* acc_c,
                         std::vector<double>& wgt, long& degenerate) {
  const Eigen::Index K = rows.mean.cols();
  double s = 0.0;
  for (Eigen::Index q = 0; q < K; ++q) {
    wgt[q] = rows.expelog(e.row, q) * cols.expelog(e.col, q);
    s += wgt[q];
  }
  const double count = static_cast<double>(e.count);
  if (!(s > 0.0) || !std::isfinite(s)) {
    ++degenerate;
    if (acc_r != nullptr) {
      const double alloc = count / static_cast<double>(K);
      for (Eigen::Index q = 0; q < K; ++q) {
        (*acc_r)(e.row, q) += alloc;
        (*acc_c)(e.col, q) += alloc;
      }
    }
    return count * std::log(kFloor);
  }
  if (acc_r != nullptr) {
    const double scale = count / s;
    for (Eigen::Index q = 0; q < K; ++q) {
      const double alloc = wgt[q] * scale;
      (*acc_r)(e.row, q) += alloc;
      (*acc_c)(e.col, q) += alloc;
    }
  }
  return count * std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// NetworkCavi

NetworkCavi::NetworkCavi(const SparseAdjacency& adj, int K,
                         const GammaPrior& prior, const FitOptions& opts)
    : adj_(adj), opts_(opts) {
  if (K < 1) throw ConfigError("fit_network: K must be >= 1");
  c.init(adj.n_persons(), K, prior, mix_seed(opts.seed, 0x6e65745f63ull),
         opts.init_jitter);
  frozen.assign(adj.n_persons(), 0);
}

double NetworkCavi::pass(Grid* acc) const {
  const auto& edges = adj_.edges();
  const int stripes = opts_.threads <= 1
                          ? 1
                          : std::min<int>(opts_.threads,
                                          std::max<std::size_t>(edges.size(), 1));
  if (stripes == 1) {
    Kahan ll;
    std::vector<double> wgt(c.mean.cols());
    for (const auto& [i, j] : edges) {
      ll.add(edge_term(c, i, j, acc, wgt, degenerate_allocations));
    }
    return ll.value() - pair_rate_sum(c.mean);
  }
  std::vector<Kahan> lls(stripes);
  std::vector<long> degen(stripes, 0);
  std::vector<Grid> accs;
  if (acc != nullptr) {
    accs.assign(stripes, Grid::Zero(acc->rows(), acc->cols()));
  }
  striped_for(edges.size(), stripes, [&](std::size_t first, std::size_t last, int s) {
    std::vector<double> wgt(c.mean.cols());
    Grid* slot = acc != nullptr ? &accs[s] : nullptr;
    for (std::size_t e = first; e < last; ++e) {
      lls[s].add(edge_term(c, edges[e].first, edges[e].second, slot, wgt, degen[s]));
    }
  });
  Kahan ll;
  for (int s = 0; s < stripes; ++s) {
    ll.add(lls[s].value());
    degenerate_allocations += degen[s];
    if (acc != nullptr) *acc += accs[s];
  }
  return ll.value() - pair_rate_sum(c.mean);
}

void NetworkCavi::update_rows(const Grid& acc) {
  const Eigen::Index n = c.kappa.rows();
  Eigen::ArrayXd colsum = c.col_sums();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (frozen[i]) continue;
    colsum -= c.mean.row(i).transpose().array();
    c.kappa.row(i) = (acc.row(i).array() + c.prior.shape).matrix();
    c.nu.row(i) = (colsum + c.prior.rate).matrix().transpose();
    c.refresh_row(i);
    colsum += c.mean.row(i).transpose().array();
  }
}

void NetworkCavi::sweep() {
  Grid acc = Grid::Zero(c.kappa.rows(), c.kappa.cols());
  pass(&acc);
  update_rows(acc);
}

double NetworkCavi::loglik_part() const { return pass(nullptr); }

ElboParts NetworkCavi::elbo_parts() const {
  return {loglik_part(), 0.0, c.elbo_term()};
}

void NetworkCavi::run() {
  ElboTracker tracker(opts_);
  for (int t = 1; t <= opts_.max_sweeps; ++t) {
    Grid acc = Grid::Zero(c.kappa.rows(), c.kappa.cols());
    const double ll = pass(&acc);
    if (tracker.record_and_check(ll)) {
      converged = true;
      elbo_trace = tracker.take_trace();
      return;
    }
    update_rows(acc);
    tracker.set_tail(c.elbo_term());
  }
  tracker.finalize(loglik_part());
  converged = tracker.tol_converged();
  elbo_trace = tracker.take_trace();
}

// ---------------------------------------------------------------------------
// PmfCavi

PmfCavi::PmfCavi(const CountMatrix& x, int Q, const GammaPrior& prior,
                 const FitOptions& opts)
    : x_(x), opts_(opts) {
  if (Q < 1) throw ConfigError("fit_pmf: Q must be >= 1");
  d.init(x.n_rows(), Q, prior, mix_seed(opts.seed, 0x706d665f64ull),
         opts.init_jitter);
  w.init(x.n_cols(), Q, prior, mix_seed(opts.seed, 0x706d665f77ull),
         opts.init_jitter);
  log_fact_const_ = log_factorial_sum(x);
}

double PmfCavi::pass(Grid* acc_d, Grid* acc_w) const {
  const auto& entries = x_.entries();
  const int stripes = opts_.threads <= 1
                          ? 1
                          : std::min<int>(opts_.threads,
                                          std::max<std::size_t>(entries.size(), 1));
  if (stripes == 1) {
    Kahan ll;
    std::vector<double> wgt(d.mean.cols());
    for (const auto& e : entries) {
      ll.add(count_term(d, w, e, acc_d, acc_w, wgt, degenerate_allocations));
    }
    return ll.value() - cross_rate_sum(d.mean, w.mean) - log_fact_const_;
  }
  std::vector<Kahan> lls(stripes);
  std::vector<long> degen(stripes, 0);
  std::vector<Grid> accs_d, accs_w;
  if (acc_d != nullptr) {
    accs_d.assign(stripes, Grid::Zero(acc_d->rows(), acc_d->cols()));
    accs_w.assign(stripes, Grid::Zero(acc_w->rows(), acc_w->cols()));
  }
  striped_for(entries.size(), stripes, [&](std::size_t first, std::size_t last, int s) {
    std::vector<double> wgt(d.mean.cols());
    Grid* sd = acc_d != nullptr ? &accs_d[s] : nullptr;
    Grid* sw = acc_d != nullptr ? &accs_w[s] : nullptr;
    for (std::size_t e = first; e < last; ++e) {
      lls[s].add(count_term(d, w, entries[e], sd, sw, wgt, degen[s]));
    }
  });
  Kahan ll;
  for (int s = 0; s < stripes; ++s) {
    ll.add(lls[s].value());
    degenerate_allocations += degen[s];
    if (acc_d != nullptr) {
      *acc_d += accs_d[s];
      *acc_w += accs_w[s];
    }
  }
  return ll.value() - cross_rate_sum(d.mean, w.mean) - log_fact_const_;
}

void PmfCavi::apply_updates(const Grid& acc_d, const Grid& acc_w) {
  if (update_d) {
    d.kappa = (acc_d.array() + d.prior.shape).matrix();
    d.nu.rowwise() = (w.col_sums() + d.prior.rate).matrix().transpose();
    d.refresh_all();
  }
  if (update_w) {
    w.kappa = (acc_w.array() + w.prior.shape).matrix();
    w.nu.rowwise() = (d.col_sums() + w.prior.rate).matrix().transpose();
    w.refresh_all();
  }
}

void PmfCavi::sweep() {
  Grid acc_d = Grid::Zero(d.kappa.rows(), d.kappa.cols());
  Grid acc_w = Grid::Zero(w.kappa.rows(), w.kappa.cols());
  pass(&acc_d, &acc_w);
  apply_updates(acc_d, acc_w);
}

double PmfCavi::loglik_part() const { return pass(nullptr, nullptr); }

ElboParts PmfCavi::elbo_parts() const {
  return {0.0, loglik_part(), d.elbo_term() + w.elbo_term()};
}

void PmfCavi::run() {
  ElboTracker tracker(opts_);
  for (int t = 1; t <= opts_.max_sweeps; ++t) {
    Grid acc_d = Grid::Zero(d.kappa.rows(), d.kappa.cols());
    Grid acc_w = Grid::Zero(w.kappa.rows(), w.kappa.cols());
    const double ll = pass(&acc_d, &acc_w);
    if (tracker.record_and_check(ll)) {
      converged = true;
      elbo_trace = tracker.take_trace();
      return;
    }
    apply_updates(acc_d, acc_w);
    tracker.set_tail(d.elbo_term() + w.elbo_term());
  }
  tracker.finalize(loglik_part());
  converged = tracker.tol_converged();
  elbo_trace = tracker.take_trace();
}

// ---------------------------------------------------------------------------
// JointCavi

JointCavi::JointCavi(const SparseAdjacency& adj, const CountMatrix& x, int K,
                     const GammaPrior& prior, const FitOptions& opts)
    : adj_(adj), x_(x), opts_(opts) {
  if (K < 1) throw ConfigError("fit_joint: K must be >= 1");
  if (x.n_rows() != adj.n_persons()) {
    throw DataError("fit_joint: x rows must match the number of persons");
  }
  c.init(adj.n_persons(), K, prior, mix_seed(opts.seed, 0x6a6f696e745f63ull),
         opts.init_jitter);
  w.init(x.n_cols(), K, prior, mix_seed(opts.seed, 0x6a6f696e745f77ull),
         opts.init_jitter);
  frozen.assign(adj.n_persons(), 0);
  log_fact_const_ = log_factorial_sum(x);
}

double JointCavi::net_pass(Grid* acc) const {
  const auto& edges = adj_.edges();
  const int stripes = opts_.threads <= 1
                          ? 1
                          : std::min<int>(opts_.threads,
                                          std::max<std::size_t>(edges.size(), 1));
  if (stripes == 1) {
    Kahan ll;
    std::vector<double> wgt(c.mean.cols());
    for (const auto& [i, j] : edges) {
      ll.add(edge_term(c, i, j, acc, wgt, degenerate_allocations));
    }
    return ll.value() - pair_rate_sum(c.mean);
  }
  std::vector<Kahan> lls(stripes);
  std::vector<long> degen(stripes, 0);
  std::vector<Grid> accs;
  if (acc != nullptr) {
    accs.assign(stripes, Grid::Zero(acc->rows(), acc->cols()));
  }
  striped_for(edges.size(), stripes, [&](std::size_t first, std::size_t last, int s) {
    std::vector<double> wgt(c.mean.cols());
    Grid* slot = acc != nullptr ? &accs[s] : nullptr;
    for (std::size_t e = first; e < last; ++e) {
      lls[s].add(edge_term(c, edges[e].first, edges[e].second, slot, wgt, degen[s]));
    }
  });
  Kahan ll;
  for (int s = 0; s < stripes; ++s) {
    ll.add(lls[s].value());
    degenerate_allocations += degen[s];
    if (acc != nullptr) *acc += accs[s];
  }
  return ll.value() - pair_rate_sum(c.mean);
}

double JointCavi::x_pass(Grid* acc_c, Grid* acc_w) const {
  const auto& entries = x_.entries();
  const int stripes = opts_.threads <= 1
                          ? 1
                          : std::min<int>(opts_.threads,
                                          std::max<std::size_t>(entries.size(), 1));
  if (stripes == 1) {
    Kahan ll;
    std::vector<double> wgt(c.mean.cols());
    for (const auto& e : entries) {
      ll.add(count_term(c, w, e, acc_c, acc_w, wgt, degenerate_allocations));
    }
    return ll.value() - cross_rate_sum(c.mean, w.mean) - log_fact_const_;
  }
  std::vector<Kahan> lls(stripes);
  std::vector<long> degen(stripes, 0);
  std::vector<Grid> accs_c, accs_w;
  if (acc_c != nullptr) {
    accs_c.assign(stripes, Grid::Zero(acc_c->rows(), acc_c->cols()));
    accs_w.assign(stripes, Grid::Zero(acc_w->rows(), acc_w->cols()));
  }
  striped_for(entries.size(), stripes, [&](std::size_t first, std::size_t last, int s) {
    std::vector<double> wgt(c.mean.cols());
    Grid* sc = acc_c != nullptr ? &accs_c[s] : nullptr;
    Grid* sw = acc_c != nullptr ? &accs_w[s] : nullptr;
    for (std::size_t e = first; e < last; ++e) {
      lls[s].add(count_term(c, w, entries[e], sc, sw, wgt, degen[s]));
    }
  });
  Kahan ll;
  for (int s = 0; s < stripes; ++s) {
    ll.add(lls[s].value());
    degenerate_allocations += degen[s];
    if (acc_c != nullptr) {
      *acc_c += accs_c[s];
      *acc_w += accs_w[s];
    }
  }
  return ll.value() - cross_rate_sum(c.mean, w.mean) - log_fact_const_;
}

void JointCavi::update_rows(const Grid& acc) {
  const Eigen::Index n = c.kappa.rows();
  Eigen::ArrayXd colsum = c.col_sums();
  const Eigen::ArrayXd wsum = w.col_sums();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (frozen[i]) continue;
    colsum -= c.mean.row(i).transpose().array();
    c.kappa.row(i) = (acc.row(i).array() + c.prior.shape).matrix();
    c.nu.row(i) = (colsum + wsum + c.prior.rate).matrix().transpose();
    c.refresh_row(i);
    colsum += c.mean.row(i).transpose().array();
  }
}

void JointCavi::apply_w_update(const Grid& acc_w) {
  if (!update_w) return;
  w.kappa = (acc_w.array() + w.prior.shape).matrix();
  w.nu.rowwise() = (c.col_sums() + w.prior.rate).matrix().transpose();
  w.refresh_all();
}

void JointCavi::sweep() {
  Grid acc_c = Grid::Zero(c.kappa.rows(), c.kappa.cols());
  Grid acc_w = Grid::Zero(w.kappa.rows(), w.kappa.cols());
  net_pass(&acc_c);
  x_pass(&acc_c, &acc_w);
  update_rows(acc_c);
  apply_w_update(acc_w);
}

double JointCavi::loglik_part() const {
  return net_pass(nullptr) + x_pass(nullptr, nullptr);
}

ElboParts JointCavi::elbo_parts() const {
  return {net_pass(nullptr), x_pass(nullptr, nullptr),
          c.elbo_term() + w.elbo_term()};
}

void JointCavi::run() {
  ElboTracker tracker(opts_);
  for (int t = 1; t <= opts_.max_sweeps; ++t) {
    Grid acc_c = Grid::Zero(c.kappa.rows(), c.kappa.cols());
    Grid acc_w = Grid::Zero(w.kappa.rows(), w.kappa.cols());
    const double ll = net_pass(&acc_c) + x_pass(&acc_c, &acc_w);
    if (tracker.record_and_check(ll)) {
      converged = true;
      elbo_trace = tracker.take_trace();
      return;
    }
    update_rows(acc_c);
    apply_w_update(acc_w);
    tracker.set_tail(c.elbo_term() + w.elbo_term());
  }
  tracker.finalize(loglik_part());
  converged = tracker.tol_converged();
  elbo_trace = tracker.take_trace();
}

}  // namespace pif

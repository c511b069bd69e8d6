#ifndef PIF_CAVI_UTIL_HPP
#define PIF_CAVI_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "pif/gamma.hpp"
#include "pif/grids.hpp"
#include "pif/rng.hpp"
#include "pif/special.hpp"

namespace pif {

// Splits [0, n) into one contiguous stripe per thread and runs
// body(first, last, stripe). The partition depends only on the thread count,
// so results are reproducible for a fixed count; reducing per-stripe
// compensated partials in stripe order keeps the drift against the serial
// path below 1e-12.
inline void striped_for(std::size_t n, int threads,
                        const std::function<void(std::size_t, std::size_t, int)>& body) {
  if (threads <= 1 || n == 0) {
    body(0, n, 0);
    return;
  }
  const int stripes = std::min<int>(threads, static_cast<int>(n));
  std::vector<std::thread> pool;
  pool.reserve(stripes);
  for (int s = 0; s < stripes; ++s) {
    const std::size_t first = n * s / stripes;
    const std::size_t last = n * (s + 1) / stripes;
    pool.emplace_back([&body, first, last, s] { body(first, last, s); });
  }
  for (auto& t : pool) t.join();
}

// Neumaier-compensated accumulator for the large ELBO sums.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

// One grid of Gamma variational factors with cached posterior means,
// E[log theta], and exp(E[log theta]). Tests may clamp a block (or single
// rows) to a point mass, which freezes the caches and removes the block
// from the ELBO.
struct LatentBlock {
  GammaPrior prior;
  Grid kappa;
  Grid nu;
  Grid mean;
  Grid elog;
  Grid expelog;
  bool clamped = false;

  void init(Eigen::Index rows, Eigen::Index cols, const GammaPrior& p,
            std::uint64_t seed, double jitter) {
    prior = p;
    kappa.resize(rows, cols);
    nu = Grid::Constant(rows, cols, p.rate);
    Rng rng(seed);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        kappa(r, c) = p.shape * (1.0 + jitter * rng.uniform());
      }
    }
    mean.resize(rows, cols);
    elog.resize(rows, cols);
    expelog.resize(rows, cols);
    refresh_all();
  }

  void set_point_mass(double v) {
    mean.setConstant(v);
    elog.setConstant(std::log(v));
    expelog.setConstant(v);
    clamped = true;
  }

  void set_point_mass_row(Eigen::Index r, double v) {
    mean.row(r).setConstant(v);
    elog.row(r).setConstant(std::log(v));
    expelog.row(r).setConstant(v);
  }

  void refresh_row(Eigen::Index r) {
    for (Eigen::Index c = 0; c < kappa.cols(); ++c) {
      const double k = kappa(r, c);
      const double n = nu(r, c);
      mean(r, c) = k / n;
      elog(r, c) = digamma(k) - std::log(n);
      expelog(r, c) = std::exp(elog(r, c));
    }
  }

  void refresh_all() {
    for (Eigen::Index r = 0; r < kappa.rows(); ++r) refresh_row(r);
  }

  Eigen::ArrayXd col_sums() const { return mean.colwise().sum().array(); }

  // E_q[log p(theta)] - E_q[log q(theta)], summed over the grid.
  double elbo_term() const {
    if (clamped) return 0.0;
    const double a = prior.shape;
    const double b = prior.rate;
    const double head = a * std::log(b) - std::lgamma(a);
    Kahan acc;
    for (Eigen::Index r = 0; r < kappa.rows(); ++r) {
      for (Eigen::Index c = 0; c < kappa.cols(); ++c) {
        const double k = kappa(r, c);
        const double n = nu(r, c);
        acc.add(head + (a - k) * elog(r, c) - b * mean(r, c) +
                std::lgamma(k) - k * std::log(n) + k);
      }
    }
    return acc.value();
  }
};

// Trace bookkeeping shared by the CAVI engines. The likelihood part of the
// collapsed ELBO for the state after sweep t is computed for free during
// sweep t+1's allocation pass, so each entry is assembled one sweep late:
// `tail` (rate sums and Gamma terms) is stored when a sweep finishes and
// married to the matching likelihood part on the next pass.
class ElboTracker {
 public:
  explicit ElboTracker(const FitOptions& opts) : opts_(opts) {}

  // Called with the likelihood part evaluated under the pre-update state.
  // Returns true when the loop should stop with that state kept as final.
  bool record_and_check(double loglik_part) {
    if (!have_tail_) return false;  // nothing recorded for the init state
    trace_.push_back(loglik_part + tail_);
    ++since_check_;
    if (since_check_ >= opts_.elbo_check_every && trace_.size() >= 2) {
      since_check_ = 0;
      const std::size_t lag = std::min<std::size_t>(
          static_cast<std::size_t>(opts_.elbo_check_every), trace_.size() - 1);
      const double pair[2] = {trace_[trace_.size() - 1 - lag], trace_.back()};
      if (check_convergence(pair, opts_)) {
        tol_converged_ = true;
        return true;
      }
    }
    return false;
  }

  void set_tail(double tail) {
    tail_ = tail;
    have_tail_ = true;
  }

  // Closes the trace when the sweep cap is reached.
  void finalize(double loglik_part) {
    if (have_tail_) trace_.push_back(loglik_part + tail_);
  }

  const std::vector<double>& trace() const { return trace_; }
  std::vector<double> take_trace() { return std::move(trace_); }
  bool tol_converged() const { return tol_converged_; }

 private:
  FitOptions opts_;
  std::vector<double> trace_;
  double tail_ = 0.0;
  bool have_tail_ = false;
  bool tol_converged_ = false;
  int since_check_ = 0;
};

}  // namespace pif

#endif

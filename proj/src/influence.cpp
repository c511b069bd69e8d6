#include "pif/influence.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <utility>

#include <json.hpp>

#include "pif/cavi_util.hpp"
#include "pif/errors.hpp"
#include "pif/io.hpp"
#include "pif/special.hpp"

namespace pif {

namespace {

constexpr double kFloor = 1e-10;

void refresh_flat(const Eigen::ArrayXd& kappa, const Eigen::ArrayXd& nu,
                  Eigen::ArrayXd& mean, Eigen::ArrayXd& elog,
                  Eigen::ArrayXd& expelog) {
  const Eigen::Index n = kappa.size();
  for (Eigen::Index t = 0; t < n; ++t) {
    mean[t] = kappa[t] / nu[t];
    elog[t] = digamma(kappa[t]) - std::log(nu[t]);
    expelog[t] = std::exp(elog[t]);
  }
}

double flat_gamma_terms(const Eigen::ArrayXd& kappa, const Eigen::ArrayXd& nu,
                        const Eigen::ArrayXd& mean, const Eigen::ArrayXd& elog,
                        Eigen::Index lo, Eigen::Index hi, const GammaPrior& p) {
  const double head = p.shape * std::log(p.rate) - std::lgamma(p.shape);
  Kahan acc;
  for (Eigen::Index t = lo; t < hi; ++t) {
    acc.add(head + (p.shape - kappa[t]) * elog[t] - p.rate * mean[t] +
            std::lgamma(kappa[t]) - kappa[t] * std::log(nu[t]) + kappa[t]);
  }
  return acc.value();
}

GammaVariational slice_block(const Eigen::ArrayXd& kappa, const Eigen::ArrayXd& nu,
                             Eigen::Index base, Eigen::Index rows, Eigen::Index cols) {
  GammaVariational gv;
  gv.shape.resize(rows, cols);
  gv.rate.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      gv.shape(r, c) = kappa[base + r * cols + c];
      gv.rate(r, c) = nu[base + r * cols + c];
    }
  }
  return gv;
}

// Outcome-model coordinate ascent over a flat latent vector laid out as
// [gamma (m x Kc) | alpha (n x Kw) | beta (n)]. The rates are fixed up
// front, so one sweep is an exact aux-then-shapes block update.
class OutcomeCavi {
 public:
  OutcomeCavi(const OutcomeInputs& in, const OutcomePriors& priors,
              const FitOptions& opts)
      : priors_(priors), opts_(opts) {
    const CountMatrix& y = *in.y;
    n_ = in.adj->n_persons();
    m_ = y.n_cols();
    if (y.n_rows() != n_) throw DataError("fit_outcome: y rows != persons");
    Kc_ = in.u_bar.size() == 0 ? 0 : static_cast<int>(in.u_bar.cols());
    Kw_ = in.w_bar.size() == 0 ? 0 : static_cast<int>(in.w_bar.cols());
    if (Kc_ > 0 && in.u_bar.rows() != n_) {
      throw DataError("fit_outcome: u_bar rows != persons");
    }
    if (Kw_ > 0 && in.w_bar.rows() != m_) {
      throw DataError("fit_outcome: w_bar rows != items");
    }
    gamma_base_ = 0;
    alpha_base_ = m_ * Kc_;
    beta_base_ = alpha_base_ + n_ * Kw_;
    n_latents_ = beta_base_ + n_;

    exposure_ = std::make_unique<ExposureIndex>(*in.adj, *in.x, in.binarize_exposure);

    // Fixed rates: prior rate plus the covariate (or exposure) mass each
    // latent multiplies across the full matrix.
    nu_.resize(n_latents_);
    prior_shape_.resize(n_latents_);
    prior_rate_.resize(n_latents_);
    if (Kc_ > 0) {
      Eigen::ArrayXd ucol = in.u_bar.colwise().sum().array();
      for (int k = 0; k < m_; ++k) {
        for (int q = 0; q < Kc_; ++q) {
          nu_[gamma_base_ + k * Kc_ + q] = priors.loading.rate + ucol[q];
        }
      }
    }
    if (Kw_ > 0) {
      Eigen::ArrayXd wcol = in.w_bar.colwise().sum().array();
      for (int i = 0; i < n_; ++i) {
        for (int p = 0; p < Kw_; ++p) {
          nu_[alpha_base_ + i * Kw_ + p] = priors.loading.rate + wcol[p];
        }
      }
    }
    for (int j = 0; j < n_; ++j) {
      nu_[beta_base_ + j] = priors.influence.rate + exposure_->total(j);
    }
    prior_shape_.segment(0, beta_base_).setConstant(priors.loading.shape);
    prior_shape_.segment(beta_base_, n_).setConstant(priors.influence.shape);
    prior_rate_.segment(0, beta_base_).setConstant(priors.loading.rate);
    prior_rate_.segment(beta_base_, n_).setConstant(priors.influence.rate);

    // Observation arena. Components with zero covariate weight can never
    // receive mass and are left out.
    const bool allow_unexplained = (Kc_ == 0 && Kw_ == 0);
    obs_off_.push_back(0);
    Kahan logfact;
    for (const auto& e : y.entries()) {
      const std::size_t start = comp_latent_.size();
      if (Kc_ > 0) {
        for (int q = 0; q < Kc_; ++q) {
          const double u = in.u_bar(e.row, q);
          if (u > 0.0) {
            comp_latent_.push_back(gamma_base_ + e.col * Kc_ + q);
            comp_weight_.push_back(u);
          }
        }
      }
      if (Kw_ > 0) {
        for (int p = 0; p < Kw_; ++p) {
          const double wv = in.w_bar(e.col, p);
          if (wv > 0.0) {
            comp_latent_.push_back(alpha_base_ + e.row * Kw_ + p);
            comp_weight_.push_back(wv);
          }
        }
      }
      for (const auto& [j, ev] : exposure_->gather(e.row, e.col)) {
        comp_latent_.push_back(beta_base_ + j);
        comp_weight_.push_back(ev);
      }
      if (comp_latent_.size() == start) {
        if (!allow_unexplained) throw ModelInconsistencyError(e.row, e.col);
        ++n_unexplained_;
        continue;  // dropped from the likelihood
      }
      obs_y_.push_back(e.count);
      obs_off_.push_back(static_cast<int>(comp_latent_.size()));
      logfact.add(std::lgamma(static_cast<double>(e.count) + 1.0));
    }
    log_fact_const_ = logfact.value();

    // Jittered shape init, rates already final.
    Rng rng(mix_seed(opts.seed, 0x6f7574636f6d65ull));
    kappa_.resize(n_latents_);
    for (Eigen::Index t = 0; t < n_latents_; ++t) {
      kappa_[t] = prior_shape_[t] * (1.0 + opts.init_jitter * rng.uniform());
    }
    mean_.resize(n_latents_);
    elog_.resize(n_latents_);
    expelog_.resize(n_latents_);
    refresh_flat(kappa_, nu_, mean_, elog_, expelog_);
  }

  // One stripe of the allocation pass over [first, last) observations.
  void pass_range(std::size_t first, std::size_t last, Eigen::ArrayXd* acc,
                  Kahan& ll, long& degenerate) const {
    std::vector<double> wgt;
    for (std::size_t o = first; o < last; ++o) {
      const int lo = obs_off_[o];
      const int hi = obs_off_[o + 1];
      wgt.resize(hi - lo);
      double s = 0.0;
      for (int t = lo; t < hi; ++t) {
        wgt[t - lo] = expelog_[comp_latent_[t]] * comp_weight_[t];
        s += wgt[t - lo];
      }
      const double count = static_cast<double>(obs_y_[o]);
      if (s > 0.0 && std::isfinite(s)) {
        ll.add(count * std::log(s));
        if (acc != nullptr) {
          const double scale = count / s;
          for (int t = lo; t < hi; ++t) {
            (*acc)[comp_latent_[t]] += wgt[t - lo] * scale;
          }
        }
      } else {
        ++degenerate;
        ll.add(count * std::log(kFloor));
        if (acc != nullptr) {
          const double alloc = count / static_cast<double>(hi - lo);
          for (int t = lo; t < hi; ++t) (*acc)[comp_latent_[t]] += alloc;
        }
      }
    }
  }

  double pass(Eigen::ArrayXd* acc) const {
    const std::size_t n_obs = obs_y_.size();
    const int stripes =
        opts_.threads <= 1
            ? 1
            : std::min<int>(opts_.threads, std::max<std::size_t>(n_obs, 1));
    Kahan ll;
    if (stripes == 1) {
      pass_range(0, n_obs, acc, ll, degenerate_allocations_);
    } else {
      std::vector<Kahan> lls(stripes);
      std::vector<long> degen(stripes, 0);
      std::vector<Eigen::ArrayXd> accs;
      if (acc != nullptr) {
        accs.assign(stripes, Eigen::ArrayXd::Zero(n_latents_));
      }
      striped_for(n_obs, stripes, [&](std::size_t first, std::size_t last, int s) {
        pass_range(first, last, acc != nullptr ? &accs[s] : nullptr, lls[s],
                   degen[s]);
      });
      for (int s = 0; s < stripes; ++s) {
        ll.add(lls[s].value());
        degenerate_allocations_ += degen[s];
        if (acc != nullptr) *acc += accs[s];
      }
    }
    // Total rate over all cells: each latent multiplies exactly the
    // covariate mass folded into its fixed rate.
    Kahan rate;
    for (Eigen::Index t = 0; t < n_latents_; ++t) {
      rate.add(mean_[t] * (nu_[t] - prior_rate_[t]));
    }
    return ll.value() - rate.value() - log_fact_const_;
  }

  void update(const Eigen::ArrayXd& acc) {
    kappa_ = prior_shape_ + acc;
    refresh_flat(kappa_, nu_, mean_, elog_, expelog_);
  }

  double gamma_terms() const {
    double total = flat_gamma_terms(kappa_, nu_, mean_, elog_, 0, beta_base_,
                                    priors_.loading);
    total += flat_gamma_terms(kappa_, nu_, mean_, elog_, beta_base_, n_latents_,
                              priors_.influence);
    return total;
  }

  void run(std::vector<double>& trace, bool& converged) {
    ElboTracker tracker(opts_);
    for (int t = 1; t <= opts_.max_sweeps; ++t) {
      Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n_latents_);
      const double ll = pass(&acc);
      if (tracker.record_and_check(ll)) {
        converged = true;
        trace = tracker.take_trace();
        return;
      }
      update(acc);
      tracker.set_tail(gamma_terms());
    }
    tracker.finalize(pass(nullptr));
    converged = tracker.tol_converged();
    trace = tracker.take_trace();
  }

  InfluencePosterior finish(Variant variant) {
    InfluencePosterior post;
    post.variant = variant;
    post.beta = slice_block(kappa_, nu_, beta_base_, n_, 1);
    if (Kc_ > 0) post.gamma = slice_block(kappa_, nu_, gamma_base_, m_, Kc_);
    if (Kw_ > 0) post.alpha = slice_block(kappa_, nu_, alpha_base_, n_, Kw_);
    post.exposure_total = exposure_->totals();
    post.no_evidence.resize(n_);
    for (int j = 0; j < n_; ++j) post.no_evidence[j] = exposure_->total(j) == 0.0;
    post.n_unexplained = n_unexplained_;
    post.priors = priors_;
    post.seed = opts_.seed;
    return post;
  }

 private:
  OutcomePriors priors_;
  FitOptions opts_;
  int n_ = 0, m_ = 0, Kc_ = 0, Kw_ = 0;
  Eigen::Index gamma_base_ = 0, alpha_base_ = 0, beta_base_ = 0, n_latents_ = 0;
  std::unique_ptr<ExposureIndex> exposure_;
  Eigen::ArrayXd kappa_, nu_, mean_, elog_, expelog_;
  Eigen::ArrayXd prior_shape_, prior_rate_;
  std::vector<int> comp_latent_;
  std::vector<double> comp_weight_;
  std::vector<long> obs_y_;
  std::vector<int> obs_off_;
  double log_fact_const_ = 0.0;
  long n_unexplained_ = 0;
  mutable long degenerate_allocations_ = 0;
};

// mSPF: y_ik ~ Pois(z_i . gamma_k + exposure). Both z and gamma are free, so
// their rates track the other side's means; the update order z, then gamma
// against the fresh z, then beta keeps every step an exact conditional.
class MspfCavi {
 public:
  MspfCavi(const CountMatrix& y, const SparseAdjacency& adj, const CountMatrix& x,
           int K, const OutcomePriors& priors, const FitOptions& opts)
      : K_(K), priors_(priors), opts_(opts) {
    if (K < 1) throw ConfigError("fit_mspf: K must be >= 1");
    n_ = adj.n_persons();
    m_ = y.n_cols();
    if (y.n_rows() != n_) throw DataError("fit_mspf: y rows != persons");
    exposure_ = std::make_unique<ExposureIndex>(adj, x, false);

    z_.init(n_, K, priors.loading, mix_seed(opts.seed, 0x6d7370665f7aull),
            opts.init_jitter);
    g_.init(m_, K, priors.loading, mix_seed(opts.seed, 0x6d7370665f67ull),
            opts.init_jitter);
    beta_kappa_.resize(n_);
    beta_nu_.resize(n_);
    Rng rng(mix_seed(opts.seed, 0x6d7370665f62ull));
    for (int j = 0; j < n_; ++j) {
      beta_kappa_[j] = priors.influence.shape * (1.0 + opts.init_jitter * rng.uniform());
      beta_nu_[j] = priors.influence.rate + exposure_->total(j);
    }
    beta_mean_.resize(n_);
    beta_elog_.resize(n_);
    beta_expelog_.resize(n_);
    refresh_flat(beta_kappa_, beta_nu_, beta_mean_, beta_elog_, beta_expelog_);

    obs_off_.push_back(0);
    Kahan logfact;
    for (const auto& e : y.entries()) {
      obs_cell_.push_back({e.row, e.col});
      obs_y_.push_back(e.count);
      for (const auto& [j, ev] : exposure_->gather(e.row, e.col)) {
        exp_peer_.push_back(j);
        exp_weight_.push_back(ev);
      }
      obs_off_.push_back(static_cast<int>(exp_peer_.size()));
      logfact.add(std::lgamma(static_cast<double>(e.count) + 1.0));
    }
    log_fact_const_ = logfact.value();
  }

  void pass_range(std::size_t first, std::size_t last, Grid* acc_z, Grid* acc_g,
                  Eigen::ArrayXd* acc_b, Kahan& ll, long& degenerate) const {
    std::vector<double> wgt;
    for (std::size_t o = first; o < last; ++o) {
      const auto [i, k] = obs_cell_[o];
      const int lo = obs_off_[o];
      const int hi = obs_off_[o + 1];
      const int width = K_ + (hi - lo);
      wgt.resize(width);
      double s = 0.0;
      for (int q = 0; q < K_; ++q) {
        wgt[q] = z_.expelog(i, q) * g_.expelog(k, q);
        s += wgt[q];
      }
      for (int t = lo; t < hi; ++t) {
        wgt[K_ + t - lo] = beta_expelog_[exp_peer_[t]] * exp_weight_[t];
        s += wgt[K_ + t - lo];
      }
      const double count = static_cast<double>(obs_y_[o]);
      if (s > 0.0 && std::isfinite(s)) {
        ll.add(count * std::log(s));
        if (acc_z != nullptr) {
          const double scale = count / s;
          for (int q = 0; q < K_; ++q) {
            const double alloc = wgt[q] * scale;
            (*acc_z)(i, q) += alloc;
            (*acc_g)(k, q) += alloc;
          }
          for (int t = lo; t < hi; ++t) {
            (*acc_b)[exp_peer_[t]] += wgt[K_ + t - lo] * scale;
          }
        }
      } else {
        ++degenerate;
        ll.add(count * std::log(kFloor));
        if (acc_z != nullptr) {
          const double alloc = count / static_cast<double>(width);
          for (int q = 0; q < K_; ++q) {
            (*acc_z)(i, q) += alloc;
            (*acc_g)(k, q) += alloc;
          }
          for (int t = lo; t < hi; ++t) (*acc_b)[exp_peer_[t]] += alloc;
        }
      }
    }
  }

  double pass(Grid* acc_z, Grid* acc_g, Eigen::ArrayXd* acc_b) const {
    const std::size_t n_obs = obs_y_.size();
    const int stripes =
        opts_.threads <= 1
            ? 1
            : std::min<int>(opts_.threads, std::max<std::size_t>(n_obs, 1));
    Kahan ll;
    if (stripes == 1) {
      pass_range(0, n_obs, acc_z, acc_g, acc_b, ll, degenerate_allocations_);
    } else {
      std::vector<Kahan> lls(stripes);
      std::vector<long> degen(stripes, 0);
      std::vector<Grid> accs_z, accs_g;
      std::vector<Eigen::ArrayXd> accs_b;
      if (acc_z != nullptr) {
        accs_z.assign(stripes, Grid::Zero(n_, K_));
        accs_g.assign(stripes, Grid::Zero(m_, K_));
        accs_b.assign(stripes, Eigen::ArrayXd::Zero(n_));
      }
      striped_for(n_obs, stripes, [&](std::size_t first, std::size_t last, int s) {
        if (acc_z != nullptr) {
          pass_range(first, last, &accs_z[s], &accs_g[s], &accs_b[s], lls[s],
                     degen[s]);
        } else {
          pass_range(first, last, nullptr, nullptr, nullptr, lls[s], degen[s]);
        }
      });
      for (int s = 0; s < stripes; ++s) {
        ll.add(lls[s].value());
        degenerate_allocations_ += degen[s];
        if (acc_z != nullptr) {
          *acc_z += accs_z[s];
          *acc_g += accs_g[s];
          *acc_b += accs_b[s];
        }
      }
    }
    Kahan rate;
    for (int q = 0; q < K_; ++q) {
      rate.add(z_.mean.col(q).sum() * g_.mean.col(q).sum());
    }
    for (int j = 0; j < n_; ++j) rate.add(beta_mean_[j] * exposure_->total(j));
    return ll.value() - rate.value() - log_fact_const_;
  }

  void update(const Grid& acc_z, const Grid& acc_g, const Eigen::ArrayXd& acc_b) {
    z_.kappa = (acc_z.array() + priors_.loading.shape).matrix();
    z_.nu.rowwise() = (g_.col_sums() + priors_.loading.rate).matrix().transpose();
    z_.refresh_all();
    g_.kappa = (acc_g.array() + priors_.loading.shape).matrix();
    g_.nu.rowwise() = (z_.col_sums() + priors_.loading.rate).matrix().transpose();
    g_.refresh_all();
    beta_kappa_ = acc_b + priors_.influence.shape;
    refresh_flat(beta_kappa_, beta_nu_, beta_mean_, beta_elog_, beta_expelog_);
  }

  double gamma_terms() const {
    double total = z_.elbo_term() + g_.elbo_term();
    total += flat_gamma_terms(beta_kappa_, beta_nu_, beta_mean_, beta_elog_, 0, n_,
                              priors_.influence);
    return total;
  }

  InfluencePosterior run(Variant variant) {
    ElboTracker tracker(opts_);
    bool converged = false;
    std::vector<double> trace;
    for (int t = 1; t <= opts_.max_sweeps; ++t) {
      Grid acc_z = Grid::Zero(n_, K_);
      Grid acc_g = Grid::Zero(m_, K_);
      Eigen::ArrayXd acc_b = Eigen::ArrayXd::Zero(n_);
      const double ll = pass(&acc_z, &acc_g, &acc_b);
      if (tracker.record_and_check(ll)) {
        converged = true;
        trace = tracker.take_trace();
        return finish(variant, trace, converged);
      }
      update(acc_z, acc_g, acc_b);
      tracker.set_tail(gamma_terms());
    }
    tracker.finalize(pass(nullptr, nullptr, nullptr));
    converged = tracker.tol_converged();
    trace = tracker.take_trace();
    return finish(variant, trace, converged);
  }

 private:
  InfluencePosterior finish(Variant variant, std::vector<double>& trace,
                            bool converged) {
    InfluencePosterior post;
    post.variant = variant;
    post.beta.shape.resize(n_, 1);
    post.beta.rate.resize(n_, 1);
    for (int j = 0; j < n_; ++j) {
      post.beta.shape(j, 0) = beta_kappa_[j];
      post.beta.rate(j, 0) = beta_nu_[j];
    }
    post.gamma.shape = g_.kappa;
    post.gamma.rate = g_.nu;
    post.z.shape = z_.kappa;
    post.z.rate = z_.nu;
    post.elbo_trace = std::move(trace);
    post.converged = converged;
    post.exposure_total = exposure_->totals();
    post.no_evidence.resize(n_);
    for (int j = 0; j < n_; ++j) post.no_evidence[j] = exposure_->total(j) == 0.0;
    post.priors = priors_;
    post.seed = opts_.seed;
    return post;
  }

  int n_ = 0, m_ = 0, K_ = 0;
  OutcomePriors priors_;
  FitOptions opts_;
  std::unique_ptr<ExposureIndex> exposure_;
  LatentBlock z_, g_;
  Eigen::ArrayXd beta_kappa_, beta_nu_, beta_mean_, beta_elog_, beta_expelog_;
  std::vector<std::pair<int, int>> obs_cell_;
  std::vector<long> obs_y_;
  std::vector<int> obs_off_;
  std::vector<int> exp_peer_;
  std::vector<double> exp_weight_;
  double log_fact_const_ = 0.0;
  mutable long degenerate_allocations_ = 0;
};

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::PifNet: return "pif-net";
    case Variant::PifJoint: return "pif-joint";
    case Variant::Oracle: return "oracle";
    case Variant::Unadjusted: return "unadjusted";
    case Variant::NetOnly: return "net-only";
    case Variant::Mspf: return "mspf";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "pif-net") return Variant::PifNet;
  if (s == "pif-joint") return Variant::PifJoint;
  if (s == "oracle") return Variant::Oracle;
  if (s == "unadjusted") return Variant::Unadjusted;
  if (s == "net-only") return Variant::NetOnly;
  if (s == "mspf") return Variant::Mspf;
  throw ConfigError("unknown method '" + s + "'");
}

InfluencePosterior fit_outcome(const OutcomeInputs& in, Variant variant,
                               const OutcomePriors& priors, const FitOptions& opts) {
  if (in.y == nullptr || in.adj == nullptr || in.x == nullptr) {
    throw ConfigError("fit_outcome: y, adj, and x are required");
  }
  OutcomeCavi cavi(in, priors, opts);
  std::vector<double> trace;
  bool converged = false;
  cavi.run(trace, converged);
  InfluencePosterior post = cavi.finish(variant);
  post.elbo_trace = std::move(trace);
  post.converged = converged;
  return post;
}

InfluencePosterior fit_mspf(const CountMatrix& y, const SparseAdjacency& adj,
                            const CountMatrix& x, int K,
                            const OutcomePriors& priors, const FitOptions& opts) {
  MspfCavi cavi(y, adj, x, K, priors, opts);
  return cavi.run(Variant::Mspf);
}

InfluenceEstimates estimate_influence(const InfluencePosterior& post) {
  InfluenceEstimates est;
  const Eigen::Index n = post.beta.rows();
  est.beta_hat.resize(n);
  est.no_peers.assign(post.no_evidence.begin(), post.no_evidence.end());
  for (Eigen::Index j = 0; j < n; ++j) {
    est.beta_hat[j] = post.beta.shape(j, 0) / post.beta.rate(j, 0);
  }
  return est;
}

double outcome_rate(const InfluencePosterior& post, const OutcomeInputs& in,
                    const ExposureIndex& exposure, int i, int k) {
  double rate = 0.0;
  if (post.variant == Variant::Mspf) {
    for (Eigen::Index q = 0; q < post.z.cols(); ++q) {
      rate += (post.z.shape(i, q) / post.z.rate(i, q)) *
              (post.gamma.shape(k, q) / post.gamma.rate(k, q));
    }
  } else {
    if (post.gamma.rows() > 0) {
      for (Eigen::Index q = 0; q < post.gamma.cols(); ++q) {
        rate += (post.gamma.shape(k, q) / post.gamma.rate(k, q)) * in.u_bar(i, q);
      }
    }
    if (post.alpha.rows() > 0) {
      for (Eigen::Index p = 0; p < post.alpha.cols(); ++p) {
        rate += (post.alpha.shape(i, p) / post.alpha.rate(i, p)) * in.w_bar(k, p);
      }
    }
  }
  for (const auto& [j, ev] : exposure.gather(i, k)) {
    rate += (post.beta.shape(j, 0) / post.beta.rate(j, 0)) * ev;
  }
  return rate;
}

void save_influence(const InfluencePosterior& post, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest = {
      {"variant", to_string(post.variant)},
      {"priors",
       {{"loading", {{"shape", post.priors.loading.shape}, {"rate", post.priors.loading.rate}}},
        {"influence",
         {{"shape", post.priors.influence.shape}, {"rate", post.priors.influence.rate}}}}},
      {"seed", post.seed},
      {"converged", post.converged},
      {"elbo_final", post.elbo_trace.empty() ? 0.0 : post.elbo_trace.back()},
      {"n_unexplained", post.n_unexplained},
  };
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw DataError("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";

  InfluenceEstimates est = estimate_influence(post);
  std::ofstream bf(dir + "/beta.tsv");
  if (!bf) throw DataError("cannot write " + dir + "/beta.tsv");
  bf << "# person\tbeta_hat\tno_evidence\n";
  for (std::size_t j = 0; j < est.beta_hat.size(); ++j) {
    bf << j << "\t" << format_double(est.beta_hat[j]) << "\t"
       << static_cast<int>(est.no_peers[j]) << "\n";
  }
}

}  // namespace pif

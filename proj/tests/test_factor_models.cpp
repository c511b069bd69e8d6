#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "pif/factor_cavi.hpp"
#include "pif/factor_models.hpp"
#include "pif/io.hpp"
#include "pif/rng.hpp"

using namespace pif;

namespace {

SparseAdjacency two_cliques(int size) {
  std::vector<SparseAdjacency::Edge> edges;
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      edges.emplace_back(i, j);
      edges.emplace_back(size + i, size + j);
    }
  }
  return SparseAdjacency(2 * size, std::move(edges));
}

CountMatrix random_counts(int n, int m, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CountEntry> entries;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      if (rng.uniform() < density) entries.push_back({i, k, 1 + rng.below(5)});
    }
  }
  return CountMatrix(n, m, std::move(entries));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ma += a[t];
    mb += b[t];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    num += (a[t] - ma) * (b[t] - mb);
    va += (a[t] - ma) * (a[t] - ma);
    vb += (b[t] - mb) * (b[t] - mb);
  }
  return num / std::sqrt(va * vb);
}

void check_monotone(const std::vector<double>& trace) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    CHECK(trace[t] - trace[t - 1] >= -1e-8);
  }
}

}  // namespace

TEST_CASE("network single-coordinate update matches the conjugate posterior") {
  // one edge, K=1, the other side clamped at 1: posterior of c_0 is
  // Gam(shape + 1, rate + 1)
  const SparseAdjacency adj(2, {{0, 1}});
  const GammaPrior prior{0.3, 0.7};
  FitOptions opts;
  NetworkCavi cavi(adj, 1, prior, opts);
  cavi.c.set_point_mass_row(1, 1.0);
  cavi.frozen[1] = 1;
  cavi.sweep();
  CHECK(std::abs(cavi.c.kappa(0, 0) - (prior.shape + 1.0)) < 1e-10);
  CHECK(std::abs(cavi.c.nu(0, 0) - (prior.rate + 1.0)) < 1e-10);
}

TEST_CASE("network fit on an empty graph keeps prior shapes") {
  const SparseAdjacency adj(6, {});
  const GammaPrior prior{0.1, 0.1};
  FitOptions opts;
  opts.max_sweeps = 50;
  const FactorFit fit = fit_network(adj, 2, prior, opts);
  // no edges: shapes collapse to the prior; rates still carry the pairwise
  // mass term, so the posterior mean solves nu = rate + (n-1) shape / nu
  NetworkCavi cavi(adj, 2, prior, opts);
  cavi.run();
  for (Eigen::Index i = 0; i < cavi.c.kappa.rows(); ++i) {
    for (Eigen::Index q = 0; q < cavi.c.kappa.cols(); ++q) {
      CHECK(cavi.c.kappa(i, q) == doctest::Approx(prior.shape).epsilon(1e-12));
    }
  }
  const double nu_fix =
      0.5 * (prior.rate + std::sqrt(prior.rate * prior.rate + 4.0 * 5.0 * prior.shape));
  for (Eigen::Index i = 0; i < fit.c_hat.rows(); ++i) {
    for (Eigen::Index q = 0; q < fit.c_hat.cols(); ++q) {
      CHECK(fit.c_hat(i, q) == doctest::Approx(prior.shape / nu_fix).epsilon(1e-3));
    }
  }
}

TEST_CASE("network fit separates two cliques") {
  const SparseAdjacency adj = two_cliques(20);
  FitOptions opts;
  opts.seed = 3;
  const FactorFit fit = fit_network(adj, 2, GammaPrior{0.1, 0.1}, opts);
  CHECK(fit.converged);
  check_monotone(fit.elbo_trace);
  int first_on_0 = 0, second_on_1 = 0;
  for (int i = 0; i < 20; ++i) {
    int arg0, arg1;
    fit.c_hat.row(i).maxCoeff(&arg0);
    fit.c_hat.row(20 + i).maxCoeff(&arg1);
    first_on_0 += arg0 == 0 ? 1 : 0;
    second_on_1 += arg1 == 1 ? 1 : 0;
  }
  // block structure recovered up to factor labels
  const int aligned = std::max(first_on_0 + second_on_1,
                               (20 - first_on_0) + (20 - second_on_1));
  CHECK(aligned >= 36);  // >= 90% of 40 nodes
}

TEST_CASE("pmf single-coordinate update matches the conjugate posterior") {
  const CountMatrix x(2, 3, {{0, 0, 4}, {0, 2, 1}, {1, 1, 2}});
  const GammaPrior prior{0.2, 0.5};
  FitOptions opts;
  PmfCavi cavi(x, 1, prior, opts);
  cavi.w.set_point_mass(1.0);
  cavi.update_w = false;
  cavi.sweep();
  // kappa_i = shape + sum_k x_ik, nu_i = rate + m
  CHECK(std::abs(cavi.d.kappa(0, 0) - (prior.shape + 5.0)) < 1e-10);
  CHECK(std::abs(cavi.d.kappa(1, 0) - (prior.shape + 2.0)) < 1e-10);
  CHECK(std::abs(cavi.d.nu(0, 0) - (prior.rate + 3.0)) < 1e-10);
  CHECK(std::abs(cavi.d.nu(1, 0) - (prior.rate + 3.0)) < 1e-10);
}

TEST_CASE("pmf on an all-zero matrix keeps prior shapes") {
  const CountMatrix x(5, 4, {});
  FitOptions opts;
  opts.max_sweeps = 30;
  const GammaPrior prior{0.1, 0.1};
  PmfCavi cavi(x, 2, prior, opts);
  cavi.run();
  for (Eigen::Index t = 0; t < cavi.d.kappa.size(); ++t) {
    CHECK(cavi.d.kappa.data()[t] == doctest::Approx(prior.shape).epsilon(1e-12));
  }
  for (Eigen::Index t = 0; t < cavi.w.kappa.size(); ++t) {
    CHECK(cavi.w.kappa.data()[t] == doctest::Approx(prior.shape).epsilon(1e-12));
  }
}

TEST_CASE("pmf recovers rank-1 structure") {
  Rng rng(8);
  const int n = 50, m = 50;
  std::vector<double> u(n), v(m);
  for (double& val : u) val = rng.gamma(2.0, 0.5);
  for (double& val : v) val = rng.gamma(2.0, 0.5);
  std::vector<CountEntry> entries;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      const long count = std::lround(u[i] * v[k]);
      if (count > 0) entries.push_back({i, k, count});
    }
  }
  const CountMatrix x(n, m, std::move(entries));
  FitOptions opts;
  opts.seed = 5;
  const FactorFit fit = fit_pmf(x, 1, GammaPrior{0.1, 0.1}, opts);
  check_monotone(fit.elbo_trace);
  std::vector<double> fitted, observed;
  for (const auto& e : x.entries()) {
    fitted.push_back(fit.d_hat(e.row, 0) * fit.w_hat(e.col, 0));
    observed.push_back(static_cast<double>(e.count));
  }
  CHECK(pearson(fitted, observed) >= 0.95);
}

TEST_CASE("joint update with an empty network reduces to pmf plus rate term") {
  const SparseAdjacency adj(3, {});
  const CountMatrix x(3, 4, {{0, 1, 3}, {2, 2, 5}});
  const GammaPrior prior{0.4, 0.9};
  FitOptions opts;
  JointCavi joint(adj, x, 1, prior, opts);
  joint.c.set_point_mass(1.0);  // uniform start so allocations are deterministic
  joint.w.set_point_mass(1.0);
  joint.update_w = false;
  joint.c.clamped = false;
  joint.sweep();
  // evidence only from x; rate picks up both the other persons' masses and
  // the item mass sum_k E[w] = 4
  CHECK(std::abs(joint.c.kappa(0, 0) - (prior.shape + 3.0)) < 1e-10);
  CHECK(std::abs(joint.c.kappa(1, 0) - prior.shape) < 1e-10);
  CHECK(std::abs(joint.c.kappa(2, 0) - (prior.shape + 5.0)) < 1e-10);
  // row 0 updates first: others still at point mass 1 -> nu = rate + 2 + 4
  CHECK(std::abs(joint.c.nu(0, 0) - (prior.rate + 2.0 + 4.0)) < 1e-10);
}

TEST_CASE("joint elbo decomposes additively") {
  Rng rng(12);
  std::vector<SparseAdjacency::Edge> edges;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      if (rng.uniform() < 0.3) edges.emplace_back(i, j);
    }
  }
  const SparseAdjacency adj(10, std::move(edges));
  const CountMatrix x = random_counts(10, 8, 0.3, 77);
  FitOptions opts;
  opts.seed = 2;
  JointCavi cavi(adj, x, 2, GammaPrior{0.1, 0.1}, opts);
  for (int s = 0; s < 5; ++s) cavi.sweep();
  const ElboParts parts = cavi.elbo_parts();
  // independent recomputation of each part from the current grids
  double net_ll = 0.0;
  for (const auto& [i, j] : adj.edges()) {
    double lam = 0.0;
    for (int q = 0; q < 2; ++q) lam += cavi.c.expelog(i, q) * cavi.c.expelog(j, q);
    net_ll += std::log(lam);
  }
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      net_ll -= cavi.c.mean.row(i).dot(cavi.c.mean.row(j));
    }
  }
  double x_ll = 0.0;
  for (const auto& e : x.entries()) {
    double lam = 0.0;
    for (int q = 0; q < 2; ++q) lam += cavi.c.expelog(e.row, q) * cavi.w.expelog(e.col, q);
    x_ll += e.count * std::log(lam) - std::lgamma(static_cast<double>(e.count) + 1.0);
  }
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 8; ++k) {
      x_ll -= cavi.c.mean.row(i).dot(cavi.w.mean.row(k));
    }
  }
  CHECK(std::abs(parts.net_loglik - net_ll) < 1e-8);
  CHECK(std::abs(parts.x_loglik - x_ll) < 1e-8);
  CHECK(std::abs(parts.total() - (net_ll + x_ll + parts.prior_terms)) < 1e-8);
}

TEST_CASE("joint argmax matches network argmax when x is empty") {
  const SparseAdjacency adj = two_cliques(20);
  const CountMatrix x(40, 5, {});
  FitOptions opts;
  opts.seed = 3;
  const FactorFit net = fit_network(adj, 2, GammaPrior{0.1, 0.1}, opts);
  const FactorFit joint = fit_joint(adj, x, 2, GammaPrior{0.1, 0.1}, opts);
  check_monotone(joint.elbo_trace);
  // same partition of nodes, possibly with swapped factor labels
  int agree = 0, swapped = 0;
  for (int i = 0; i < 40; ++i) {
    int a, b;
    net.c_hat.row(i).maxCoeff(&a);
    joint.c_hat.row(i).maxCoeff(&b);
    agree += a == b ? 1 : 0;
    swapped += a != b ? 1 : 0;
  }
  CHECK(std::max(agree, swapped) >= 36);
}

TEST_CASE("factor elbo traces are monotone on random instances") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(900 + seed);
    std::vector<SparseAdjacency::Edge> edges;
    for (int i = 0; i < 25; ++i) {
      for (int j = i + 1; j < 25; ++j) {
        if (rng.uniform() < 0.15) edges.emplace_back(i, j);
      }
    }
    const SparseAdjacency adj(25, std::move(edges));
    const CountMatrix x = random_counts(25, 18, 0.2, 500 + seed);
    FitOptions opts;
    opts.seed = seed;
    opts.max_sweeps = 60;
    opts.elbo_check_every = 1;
    check_monotone(fit_network(adj, 3, GammaPrior{0.1, 0.1}, opts).elbo_trace);
    check_monotone(fit_pmf(x, 3, GammaPrior{0.1, 0.1}, opts).elbo_trace);
    check_monotone(fit_joint(adj, x, 3, GammaPrior{0.1, 0.1}, opts).elbo_trace);
  }
}

TEST_CASE("fits are deterministic given the seed") {
  const SparseAdjacency adj = two_cliques(8);
  const CountMatrix x = random_counts(16, 10, 0.25, 321);
  FitOptions opts;
  opts.seed = 99;
  opts.max_sweeps = 40;
  const FactorFit a = fit_joint(adj, x, 2, GammaPrior{0.1, 0.1}, opts);
  const FactorFit b = fit_joint(adj, x, 2, GammaPrior{0.1, 0.1}, opts);
  REQUIRE(a.c_hat.size() == b.c_hat.size());
  for (Eigen::Index t = 0; t < a.c_hat.size(); ++t) {
    CHECK(a.c_hat.data()[t] == b.c_hat.data()[t]);
  }
  for (Eigen::Index t = 0; t < a.w_hat.size(); ++t) {
    CHECK(a.w_hat.data()[t] == b.w_hat.data()[t]);
  }
}

TEST_CASE("relabeling persons permutes the substitute rows") {
  Rng rng(44);
  std::vector<SparseAdjacency::Edge> edges;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      if (rng.uniform() < 0.3) edges.emplace_back(i, j);
    }
  }
  const SparseAdjacency adj(12, edges);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  Rng perm_rng(7);
  perm_rng.shuffle(perm.begin(), perm.end());
  std::vector<SparseAdjacency::Edge> relabeled;
  for (const auto& [i, j] : edges) relabeled.emplace_back(perm[i], perm[j]);
  const SparseAdjacency adj_perm(12, std::move(relabeled));

  FitOptions opts;
  opts.seed = 1;
  opts.init_jitter = 0.0;  // identical symmetric starts on both labelings
  opts.max_sweeps = 400;
  opts.elbo_rel_tol = 1e-12;
  const FactorFit base = fit_network(adj, 2, GammaPrior{0.1, 0.1}, opts);
  const FactorFit perm_fit = fit_network(adj_perm, 2, GammaPrior{0.1, 0.1}, opts);
  // compare per-person factor multisets to stay invariant to column swaps
  for (int i = 0; i < 12; ++i) {
    std::vector<double> a = {base.c_hat(i, 0), base.c_hat(i, 1)};
    std::vector<double> b = {perm_fit.c_hat(perm[i], 0), perm_fit.c_hat(perm[i], 1)};
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-6));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-6));
  }
}

TEST_CASE("substitutes are nonnegative and converged fits are flagged") {
  const SparseAdjacency adj = two_cliques(10);
  const CountMatrix x = random_counts(20, 15, 0.2, 654);
  FitOptions opts;
  opts.seed = 17;
  const FactorFit fit = fit_joint(adj, x, 3, GammaPrior{0.1, 0.1}, opts);
  for (Eigen::Index t = 0; t < fit.c_hat.size(); ++t) {
    CHECK(fit.c_hat.data()[t] >= 0.0);
    CHECK(std::isfinite(fit.c_hat.data()[t]));
  }
  for (Eigen::Index t = 0; t < fit.w_hat.size(); ++t) {
    CHECK(fit.w_hat.data()[t] >= 0.0);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  const SparseAdjacency adj = two_cliques(10);
  FitOptions opts;
  opts.seed = 1;
  opts.max_sweeps = 2;
  opts.elbo_rel_tol = 1e-300;
  const FactorFit fit = fit_network(adj, 2, GammaPrior{0.1, 0.1}, opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.elbo_trace.size() == 2);
}

TEST_CASE("factor fit bundles round-trip") {
  const SparseAdjacency adj = two_cliques(6);
  const CountMatrix x = random_counts(12, 9, 0.3, 10);
  FitOptions opts;
  opts.seed = 4;
  opts.max_sweeps = 20;
  const FactorFit fit = fit_joint(adj, x, 2, GammaPrior{0.1, 0.1}, opts);
  const std::string dir =
      (std::filesystem::temp_directory_path() / "pif_factor_bundle").string();
  save_factor_fit(fit, dir);
  const FactorFit back = load_factor_fit(dir);
  CHECK(back.kind == fit.kind);
  CHECK(back.K == fit.K);
  CHECK(back.converged == fit.converged);
  REQUIRE(back.c_hat.size() == fit.c_hat.size());
  for (Eigen::Index t = 0; t < fit.c_hat.size(); ++t) {
    CHECK(back.c_hat.data()[t] == fit.c_hat.data()[t]);
  }
  REQUIRE(back.elbo_trace.size() == fit.elbo_trace.size());
  for (std::size_t t = 0; t < fit.elbo_trace.size(); ++t) {
    CHECK(back.elbo_trace[t] == fit.elbo_trace[t]);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("striped allocation passes track the serial reference") {
  const SparseAdjacency adj = two_cliques(12);
  const CountMatrix x = random_counts(24, 16, 0.3, 777);
  GammaPrior prior{0.1, 0.1};
  FitOptions serial;
  serial.seed = 5;
  serial.max_sweeps = 30;
  FitOptions striped = serial;
  striped.threads = 3;
  const FactorFit a = fit_joint(adj, x, 2, prior, serial);
  const FactorFit b = fit_joint(adj, x, 2, prior, striped);
  const FactorFit b2 = fit_joint(adj, x, 2, prior, striped);
  REQUIRE(a.elbo_trace.size() == b.elbo_trace.size());
  for (std::size_t t = 0; t < a.elbo_trace.size(); ++t) {
    CHECK(std::abs(a.elbo_trace[t] - b.elbo_trace[t]) <=
          1e-10 * std::abs(a.elbo_trace[t]));
    CHECK(b.elbo_trace[t] == b2.elbo_trace[t]);  // fixed stripe count repeats
  }
  for (Eigen::Index t = 0; t < a.c_hat.size(); ++t) {
    CHECK(a.c_hat.data()[t] == doctest::Approx(b.c_hat.data()[t]).epsilon(1e-9));
    CHECK(b.c_hat.data()[t] == b2.c_hat.data()[t]);
  }
}

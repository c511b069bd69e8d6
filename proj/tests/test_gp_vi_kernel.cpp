#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pif/gamma.hpp"
#include "pif/rng.hpp"
#include "pif/special.hpp"

using namespace pif;

namespace {

// Independent Euler-Mascheroni oracle: gamma = H_N - ln N - 1/(2N) + 1/(12N^2)
// with the remainder below 1/(120 N^4).
double euler_gamma_ref() {
  const long n = 10'000'000;
  double h = 0.0;
  for (long k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  const double nn = static_cast<double>(n);
  return h - std::log(nn) - 1.0 / (2.0 * nn) + 1.0 / (12.0 * nn * nn);
}

GammaVariational single(double kappa, double nu) {
  GammaVariational gv;
  gv.shape = Grid::Constant(1, 1, kappa);
  gv.rate = Grid::Constant(1, 1, nu);
  return gv;
}

}  // namespace

TEST_CASE("digamma recurrence at fixed points") {
  for (double x : {0.5, 1.0, 7.3}) {
    CHECK(digamma(x + 1.0) - digamma(x) == doctest::Approx(1.0 / x).epsilon(1e-12));
  }
}

TEST_CASE("digamma(1) matches the Euler-Mascheroni oracle") {
  const double gamma_ref = euler_gamma_ref();
  CHECK(std::abs(digamma(1.0) + gamma_ref) < 1e-12);
}

TEST_CASE("digamma(10) via the harmonic shift oracle") {
  const double gamma_ref = euler_gamma_ref();
  double expected = -gamma_ref;
  for (int k = 1; k <= 9; ++k) expected += 1.0 / static_cast<double>(k);
  CHECK(std::abs(digamma(10.0) - expected) < 1e-12);
}

TEST_CASE("digamma recurrence property over a log grid") {
  // 1000 points spread over (1e-4, 1e4)
  for (int t = 0; t < 1000; ++t) {
    const double x = std::pow(10.0, -4.0 + 8.0 * (t + 0.5) / 1000.0);
    const double lhs = digamma(x + 1.0) - digamma(x);
    const double rhs = 1.0 / x;
    CHECK(std::abs(lhs - rhs) / rhs < 1e-9);
  }
}

TEST_CASE("digamma rejects nonpositive input") {
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-2.5), std::domain_error);
}

TEST_CASE("gamma_mean basics") {
  CHECK(gamma_mean(single(2.0, 4.0))(0, 0) == doctest::Approx(0.5));
  CHECK(gamma_mean(single(3.7, 3.7))(0, 0) == doctest::Approx(1.0));
  CHECK(gamma_mean(single(0.3, 0.1))(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("gamma_elog values") {
  const double gamma_ref = euler_gamma_ref();
  CHECK(gamma_elog(single(1.0, 1.0))(0, 0) == doctest::Approx(-gamma_ref).epsilon(1e-10));
  // Psi(5) = Psi(1) + 1 + 1/2 + 1/3 + 1/4
  const double psi5 = -gamma_ref + 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
  CHECK(gamma_elog(single(5.0, 5.0))(0, 0) ==
        doctest::Approx(psi5 - std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("scaling the rate shifts gamma_elog by -log s") {
  for (double s : {2.0, 10.0, 123.0}) {
    const double base = gamma_elog(single(1.7, 0.9))(0, 0);
    const double scaled = gamma_elog(single(1.7, 0.9 * s))(0, 0);
    CHECK(scaled == doctest::Approx(base - std::log(s)).epsilon(1e-12));
  }
}

TEST_CASE("gamma_elog stays below log of gamma_mean (Jensen)") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    const double kappa = std::exp(rng.uniform(-3.0, 4.0));
    const double nu = std::exp(rng.uniform(-3.0, 4.0));
    const double elog = gamma_elog(single(kappa, nu))(0, 0);
    const double log_mean = std::log(gamma_mean(single(kappa, nu))(0, 0));
    CHECK(elog < log_mean);
  }
}

TEST_CASE("allocate_multinomial splits equal scores uniformly") {
  const std::vector<double> scores(4, 1.3);
  const auto phi = allocate_multinomial(8.0, scores);
  for (double p : phi) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("allocate_multinomial normalizes (1, 3)") {
  const std::vector<double> scores = {std::log(1.0), std::log(3.0)};
  const auto phi = allocate_multinomial(1.0, scores);
  CHECK(phi[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(phi[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("allocate_multinomial normalizes (1, 1, 2)") {
  const std::vector<double> scores = {0.0, 0.0, std::log(2.0)};
  const auto phi = allocate_multinomial(4.0, scores);
  CHECK(phi[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(phi[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(phi[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("allocate_multinomial is shift invariant") {
  Rng rng(29);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> scores(5);
    for (double& s : scores) s = rng.uniform(-20.0, 5.0);
    const auto base = allocate_multinomial(1.0, scores);
    const double shift = rng.uniform(-300.0, 300.0);
    for (double& s : scores) s += shift;
    const auto shifted = allocate_multinomial(1.0, scores);
    double total = 0.0;
    for (std::size_t c = 0; c < base.size(); ++c) {
      CHECK(std::abs(base[c] - shifted[c]) < 1e-12);
      total += shifted[c];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("allocate_multinomial degenerates to uniform on all -inf") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> scores = {-inf, -inf, -inf};
  bool degenerate = false;
  const auto phi = allocate_multinomial(3.0, scores, &degenerate);
  CHECK(degenerate);
  for (double p : phi) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("poisson_loglik hand values") {
  CHECK(poisson_loglik(0, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(poisson_loglik(1, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  const double expected = 3.0 * std::log(2.0) - 2.0 - std::log(6.0);
  CHECK(poisson_loglik(3, 2.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("poisson_loglik peaks at lambda = y") {
  for (long y : {1L, 4L, 11L}) {
    const double at_y = poisson_loglik(y, static_cast<double>(y));
    for (int g = 1; g <= 80; ++g) {
      const double lambda = 0.25 * g;
      if (lambda == static_cast<double>(y)) continue;
      CHECK(poisson_loglik(y, lambda) < at_y);
    }
  }
}

TEST_CASE("check_convergence relative rule") {
  FitOptions opts;
  opts.elbo_rel_tol = 1e-4;
  opts.max_sweeps = 500;
  const std::vector<double> flat = {-100.0, -100.0};
  CHECK(check_convergence(flat, opts));
  const std::vector<double> moving = {-100.0, -90.0};
  CHECK_FALSE(check_convergence(moving, opts));
}

TEST_CASE("check_convergence stops at the sweep cap") {
  FitOptions opts;
  opts.max_sweeps = 4;
  const std::vector<double> trace = {-100.0, -50.0, -25.0, -12.0};
  CHECK(check_convergence(trace, opts));
}

TEST_CASE("check_convergence rejects an empty trace") {
  FitOptions opts;
  CHECK_THROWS(check_convergence(std::vector<double>{}, opts));
}

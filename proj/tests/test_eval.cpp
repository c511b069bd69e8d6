#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pif/errors.hpp"
#include "pif/metrics.hpp"
#include "pif/rng.hpp"
#include "pif/special.hpp"

using namespace pif;

namespace {

// exhaustive positive-negative pair enumeration, ties half
double auc_brute_force(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] == 0) continue;
    for (std::size_t n = 0; n < scores.size(); ++n) {
      if (labels[n] != 0) continue;
      ++pairs;
      if (scores[p] > scores[n]) {
        wins += 1.0;
      } else if (scores[p] == scores[n]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("influence_mse basics") {
  const std::vector<double> truth = {0.1, 0.2, 0.0};
  CHECK(influence_mse(truth, truth) == 0.0);
  const std::vector<double> shifted = {0.11, 0.21, 0.01};
  CHECK(influence_mse(shifted, truth) == doctest::Approx(1e-4).epsilon(1e-9));
  const std::vector<double> est = {0.0, 0.2};
  const std::vector<double> tr = {0.1, 0.1};
  CHECK(influence_mse(est, tr) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(influence_mse(est, truth), DataError);
}

TEST_CASE("heldout_loglik single and mean cases") {
  const std::vector<HeldoutEntry> one = {{0, 0, 0}};
  const auto unit_rate = [](int, int) { return 1.0; };
  CHECK(heldout_loglik(unit_rate, one) == doctest::Approx(-1.0).epsilon(1e-12));
  const std::vector<HeldoutEntry> two = {{0, 0, 0}, {0, 1, 1}};
  CHECK(heldout_loglik(unit_rate, two) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("heldout_loglik against a hand-summed baseline") {
  // x: person 0 touched 2 items, person 1 touched 4 -> rates 1/2 and 1/4
  const CountMatrix x(2, 5, {{0, 0, 1}, {0, 3, 2}, {1, 0, 1}, {1, 1, 1}, {1, 2, 3}, {1, 4, 1}});
  const auto rate = baseline_rates(x);
  const std::vector<HeldoutEntry> heldout = {{0, 1, 1}, {0, 2, 0}, {1, 3, 2}};
  // hand sum: ll(1; 0.5) + ll(0; 0.5) + ll(2; 0.25)
  const double expected = (std::log(0.5) - 0.5) + (-0.5) +
                          (2.0 * std::log(0.25) - 0.25 - std::log(2.0));
  CHECK(heldout_loglik(rate, heldout) ==
        doctest::Approx(expected / 3.0).epsilon(1e-12));
}

TEST_CASE("baseline_rates counts distinct items per row") {
  const CountMatrix x(3, 8, {{0, 1, 5}, {0, 2, 1}, {0, 5, 2}, {0, 7, 1}, {2, 3, 9}});
  const auto rate = baseline_rates(x);
  CHECK(rate(0, 0) == doctest::Approx(0.25));
  CHECK(rate(2, 4) == doctest::Approx(1.0));
  CHECK(rate(1, 0) == doctest::Approx(1e-10));  // empty row guard
}

TEST_CASE("auc on separated, tied, and mixed inputs") {
  const std::vector<double> sep = {0.1, 0.2, 0.8, 0.9};
  const std::vector<int> lab = {0, 0, 1, 1};
  CHECK(auc(sep, lab) == doctest::Approx(1.0));
  const std::vector<double> ties = {0.5, 0.5, 0.5, 0.5};
  CHECK(auc(ties, lab) == doctest::Approx(0.5));
  const std::vector<double> mixed = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> lab2 = {0, 0, 1, 1};
  CHECK(auc(mixed, lab2) == doctest::Approx(0.75));
  CHECK(auc(mixed, lab2) == doctest::Approx(auc_brute_force(mixed, lab2)));
}

TEST_CASE("auc rejects single-class labels") {
  const std::vector<double> scores = {0.1, 0.2};
  const std::vector<int> ones = {1, 1};
  CHECK_THROWS_AS(auc(scores, ones), DataError);
}

TEST_CASE("auc matches brute force on random small instances") {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng.below(11));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      // coarse scores make ties common
      scores[i] = static_cast<double>(rng.below(5)) / 4.0;
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    bool has0 = false, has1 = false;
    for (int l : labels) (l ? has1 : has0) = true;
    if (!has0 || !has1) continue;
    CHECK(auc(scores, labels) ==
          doctest::Approx(auc_brute_force(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(78);
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    scores[i] = rng.uniform(0.0, 2.0);
    labels[i] = rng.bernoulli(0.4) ? 1 : 0;
  }
  labels[0] = 0;
  labels[1] = 1;
  const double base = auc(scores, labels);
  std::vector<double> transformed(30);
  for (int i = 0; i < 30; ++i) transformed[i] = std::exp(3.0 * scores[i]) + 7.0;
  CHECK(auc(transformed, labels) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("auc complement identity without ties") {
  Rng rng(79);
  std::vector<double> scores(25);
  std::vector<int> labels(25);
  for (int i = 0; i < 25; ++i) {
    scores[i] = rng.uniform(0.0, 1.0);
    labels[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  labels[0] = 0;
  labels[1] = 1;
  std::vector<double> negated(25);
  for (int i = 0; i < 25; ++i) negated[i] = -scores[i];
  CHECK(auc(scores, labels) + auc(negated, labels) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("heldout_loglik dips when a rate moves off its count") {
  const std::vector<HeldoutEntry> cell = {{0, 0, 3}};
  const auto at = [&](double lambda) {
    return heldout_loglik([lambda](int, int) { return lambda; }, cell);
  };
  CHECK(at(3.0) > at(2.0));
  CHECK(at(3.0) > at(4.0));
}

#ifndef PIF_SPECIAL_HPP
#define PIF_SPECIAL_HPP

namespace pif {

// Digamma via recurrence shift to x >= 10 followed by the asymptotic series.
// Throws std::domain_error for x <= 0.
double digamma(double x);

// Poisson log likelihood y*log(max(lambda, floor)) - max(lambda, floor) - log(y!).
double poisson_loglik(long y, double lambda, double floor = 1e-10);

}  // namespace pif

#endif

#ifndef VIMCO_MATH_HPP
#define VIMCO_MATH_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace vimco {

/// Numerically stable logistic function; never produces NaN for finite x.
inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// log(a/(1-a)) for an inclusion probability a in (0,1).
inline double log_prior_odds(double a) { return logit(a); }

/// Posterior inclusion probability for one coordinate given its slab
/// moments: logit(alpha) = logit(a) + mu^2/(2 s^2) + 0.5 log(s^2/sigma_b^2).
inline double posterior_inclusion(double log_odds_a, double mu, double s2,
                                  double sigma2_beta) {
  return logistic(log_odds_a + 0.5 * mu * mu / s2 +
                  0.5 * std::log(s2 / sigma2_beta));
}

/// x*log(x/y) with the 0*log(0) = 0 convention.
inline double xlogx_over(double x, double y) {
  return x > 0.0 ? x * std::log(x / y) : 0.0;
}

/// KL(Bernoulli(alpha) || Bernoulli(a)); safe at alpha = 0 and 1.
inline double kl_bernoulli(double alpha, double a) {
  return xlogx_over(alpha, a) + xlogx_over(1.0 - alpha, 1.0 - a);
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// splitmix64 mix; used to derive independent per-replicate RNG streams
/// from a base seed and a counter.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x6a09e667f3bcc909ULL));
}

}  // namespace vimco

#endif

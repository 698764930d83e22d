#ifndef VIMCO_ORACLE_HPP
#define VIMCO_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "vimco/types.hpp"

namespace vimco {

/// Exact posterior over all 2^(pK) sparsity configurations of a tiny
/// instance, obtained by enumerating every configuration and integrating the
/// slab effects analytically. Ground truth for the variational engine.
struct ExactPosterior {
  double log_marginal = 0.0;          // log p(Y | X; params)
  std::vector<double> config_log_probs;  // indexed by bitmask, bit j*K+k
  Matrix inclusion_probs;             // p x K exact Pr(gamma_jk = 1 | Y)

  Eigen::Index n_snps() const { return inclusion_probs.rows(); }
  Eigen::Index n_traits() const { return inclusion_probs.cols(); }
};

/// Which linear-algebra route evaluates the per-configuration Gaussian
/// likelihood. Both must agree to ~1e-8; keeping them independent is the
/// point (each validates the other).
enum class OraclePath {
  kDense,     // materialize the NK x NK covariance, Cholesky it
  kWoodbury,  // work in the m-dimensional active-effect space
};

/// Enumerates all configurations. Requires p*K <= 16 and N*K <= 200
/// (TooLarge otherwise). SingularCovariance if a per-configuration
/// covariance fails its Cholesky.
ExactPosterior exact_posterior(const GenotypeMatrix& geno,
                               const PhenotypeMatrix& pheno,
                               const ModelParams& params,
                               OraclePath path = OraclePath::kDense);

/// Just the normalizing constant log p(Y | X; params).
double exact_log_marginal(const GenotypeMatrix& geno,
                          const PhenotypeMatrix& pheno,
                          const ModelParams& params,
                          OraclePath path = OraclePath::kDense);

}  // namespace vimco

#endif

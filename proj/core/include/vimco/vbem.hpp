#ifndef VIMCO_VBEM_HPP
#define VIMCO_VBEM_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vimco/types.hpp"

namespace vimco {

enum class FitMode {
  kFull,               // dense error precision, traits share information
  kDiagonalPrecision,  // off-diagonals of Theta^-1 zeroed: per-trait BVSR
};

/// Starting point carried over from a previous fit (or another mode).
struct WarmStart {
  VariationalState state;
  ModelParams params;
};

struct FitConfig {
  int max_iters = 600;
  double elbo_rel_tol = 1e-6;  // stop when |dL| / (|L|+1) < tol
  FitMode mode = FitMode::kFull;
  std::optional<WarmStart> warm_start;  // null-model init when absent
  uint64_t seed = 0;
  bool shuffle_coordinates = false;
};

struct FitResult {
  VariationalState state;
  ModelParams params;
  std::vector<double> elbo_trace;  // one entry per (E+M) iteration
  bool converged = false;
  int n_iters = 0;
};

/// The additive pieces of the evidence lower bound, exposed so tests can
/// check individual terms (e.g. the KL-to-prior terms vanish when q equals
/// the prior).
struct ElboTerms {
  double residual_quad;     // -1/2 sum_st theta_st R_s.R_t
  double variance_corr;     // -1/2 sum_s theta_ss sum_j ||X_j||^2 var term
  double bernoulli_kl;      // -KL(q(gamma) || prior)
  double log_det;           // (N/2) log |Theta|
  double slab_kl;           // -sum alpha KL(N(mu,s2) || N(0,sigma2))
  double constant;          // -(NK/2) log 2pi

  double total() const {
    return residual_quad + variance_corr + bernoulli_kl + log_det + slab_kl +
           constant;
  }
};

/// One coordinate of the E-step: recomputes (mu, s2, alpha) at (j,k) with
/// every other factor held at its current value, then patches residual
/// column k in place.
void update_coordinate(VariationalState& state, const ModelParams& params,
                       const GenotypeMatrix& geno, Eigen::Index j,
                       Eigen::Index k);

using CoordinateOrder = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

/// Full E-step pass in row-major order (j outer, k inner). Equivalent to
/// calling update_coordinate over that order but organized per SNP: the K
/// dot products X_j.R_t are hoisted and the residual write-back deferred to
/// one pass per SNP.
void e_step_sweep(VariationalState& state, const ModelParams& params,
                  const GenotypeMatrix& geno, const PhenotypeMatrix& pheno);

/// Full E-step pass visiting coordinates in the given order (each exactly
/// once). Reference path for order-dependence and equivalence tests.
void e_step_sweep(VariationalState& state, const ModelParams& params,
                  const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
                  const CoordinateOrder& order);

/// M-step: closed-form maximizers of the ELBO over (a, sigma2_beta, Theta)
/// at the current variational state. In diagonal mode the off-diagonal
/// entries of Theta^-1 are dropped before inversion.
void m_step(VariationalState& state, ModelParams& params,
            const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
            FitMode mode = FitMode::kFull);

double elbo(const VariationalState& state, const ModelParams& params,
            const GenotypeMatrix& geno, const PhenotypeMatrix& pheno);

ElboTerms elbo_decomposed(const VariationalState& state,
                          const ModelParams& params,
                          const GenotypeMatrix& geno,
                          const PhenotypeMatrix& pheno);

/// Builds the default starting point: mu = 0, alpha = a = 0.01,
/// s2 = sigma2_beta = 0.1 Var(Y_k), Theta = diag(1 / Var(Y_k)).
WarmStart null_init(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno);

/// Alternates E-step sweeps and M-steps until the relative ELBO change
/// drops below elbo_rel_tol or max_iters is hit.
FitResult fit(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
              const FitConfig& config = {});

}  // namespace vimco

#endif

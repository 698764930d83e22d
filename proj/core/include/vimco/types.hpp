#ifndef VIMCO_TYPES_HPP
#define VIMCO_TYPES_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "vimco/errors.hpp"

namespace vimco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Subtracts the mean from every column. Input is left untouched.
Matrix center_columns(const Matrix& m);

/// N x p matrix of centered genotype dosages, one column per SNP.
/// Columns are stored contiguously (column-major) because the inner loops
/// stream over per-SNP columns. Immutable after construction.
class GenotypeMatrix {
public:
  GenotypeMatrix(Matrix centered, std::vector<std::string> snp_ids);

  const Matrix& data() const { return data_; }
  const std::vector<std::string>& snp_ids() const { return snp_ids_; }
  const Vector& col_sq_norms() const { return col_sq_norms_; }
  Eigen::Index n_samples() const { return data_.rows(); }
  Eigen::Index n_snps() const { return data_.cols(); }

private:
  Matrix data_;
  std::vector<std::string> snp_ids_;
  Vector col_sq_norms_;  // cached ||X_j||^2
};

/// N x K matrix of centered trait values, one column per trait.
class PhenotypeMatrix {
public:
  PhenotypeMatrix(Matrix centered, std::vector<std::string> trait_ids);

  const Matrix& data() const { return data_; }
  const std::vector<std::string>& trait_ids() const { return trait_ids_; }
  Eigen::Index n_samples() const { return data_.rows(); }
  Eigen::Index n_traits() const { return data_.cols(); }

private:
  Matrix data_;
  std::vector<std::string> trait_ids_;
};

/// Learnable model parameters: per-trait inclusion probabilities a_k,
/// per-trait slab variances sigma^2_beta_k, and the K x K error precision.
/// a_k is clamped to [kMinInclusion, 1-kMinInclusion] and sigma^2 floored at
/// kMinSlabVar, so degenerate all-in/all-out traits cannot produce infinite
/// prior log-odds.
struct ModelParams {
  static constexpr double kMinInclusion = 1e-6;
  static constexpr double kMinSlabVar = 1e-10;

  Vector inclusion_probs;  // a_k
  Vector slab_vars;        // sigma^2_beta_k
  Matrix precision;        // Theta

  ModelParams() = default;
  /// Validates, clamps a_k, floors slab variances and checks Theta is
  /// symmetric SPD (Cholesky must succeed). Throws SingularCovariance or
  /// DimensionMismatch otherwise.
  ModelParams(Vector a, Vector sigma2_beta, Matrix theta);

  Eigen::Index n_traits() const { return inclusion_probs.size(); }
  bool precision_is_diagonal() const;
};

/// The mean-field variational state: slab moments (mu, s2), inclusion
/// probabilities alpha, all p x K, plus the cached residual matrix
/// R = Y - sum_j alpha_j. mu_j. X_j (one column per trait). Single-writer.
struct VariationalState {
  Matrix mu;
  Matrix s2;
  Matrix alpha;
  Matrix residuals;

  Eigen::Index n_snps() const { return mu.rows(); }
  Eigen::Index n_traits() const { return mu.cols(); }

  /// Recomputes the residual matrix from scratch (column by column so the
  /// arithmetic matches the single-trait path exactly).
  static Matrix residuals_from_scratch(const Matrix& mu, const Matrix& alpha,
                                       const GenotypeMatrix& geno,
                                       const PhenotypeMatrix& pheno);

  /// Largest absolute deviation between the cache and a fresh recompute.
  double residual_cache_error(const GenotypeMatrix& geno,
                              const PhenotypeMatrix& pheno) const;
};

/// Ground-truth sparse effect matrix: beta = gamma o beta_tilde.
struct SparseEffects {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> gamma;  // p x K in {0,1}
  Matrix beta_tilde;                                         // slab effects

  Matrix beta() const {
    return gamma.cast<double>().cwiseProduct(beta_tilde);
  }
  Eigen::Index n_snps() const { return gamma.rows(); }
  Eigen::Index n_traits() const { return gamma.cols(); }
};

/// Per-(SNP, trait) local FDR values with the global-FDR cutoff and the
/// resulting rejection set. threshold_xi = -1 encodes "reject nothing".
struct AssociationReport {
  Matrix lfdr;  // p x K
  double threshold_xi = -1.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> rejections;  // (snp, trait)
  double target_fdr = 0.1;
};

/// Cross-checks a genotype/phenotype pair: matching sample counts, centered
/// columns, cached norms consistent, no degenerate SNP columns, K <= N.
void validate_dataset(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno);

}  // namespace vimco

#endif

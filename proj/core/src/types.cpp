#include "vimco/types.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace vimco {

namespace {

constexpr double kCenterTol = 1e-8;
constexpr double kNormCacheRelTol = 1e-12;

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::NonNumeric, std::string(what) + " contains non-finite values");
}

}  // namespace

Matrix center_columns(const Matrix& m) {
  if (m.rows() < 2) fail(ErrorKind::TooFewRows, "centering needs at least 2 rows");
  return m.rowwise() - m.colwise().mean();
}

GenotypeMatrix::GenotypeMatrix(Matrix centered, std::vector<std::string> snp_ids)
    : data_(std::move(centered)), snp_ids_(std::move(snp_ids)) {
  if (data_.rows() < 2) fail(ErrorKind::TooFewRows, "genotype matrix needs at least 2 samples");
  if (static_cast<Eigen::Index>(snp_ids_.size()) != data_.cols())
    fail(ErrorKind::DimensionMismatch, "snp id count does not match column count");
  check_finite(data_, "genotype matrix");
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    const double mean = data_.col(j).mean();
    if (std::abs(mean) > kCenterTol) {
      std::ostringstream os;
      os << "genotype column " << j << " is not centered (mean " << mean << ")";
      fail(ErrorKind::NotCentered, os.str());
    }
  }
  col_sq_norms_ = data_.colwise().squaredNorm();
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    if (col_sq_norms_[j] == 0.0) {
      std::ostringstream os;
      os << "genotype column " << j << " (" << snp_ids_[static_cast<size_t>(j)]
         << ") is constant";
      fail(ErrorKind::DegenerateColumn, os.str());
    }
  }
}

PhenotypeMatrix::PhenotypeMatrix(Matrix centered, std::vector<std::string> trait_ids)
    : data_(std::move(centered)), trait_ids_(std::move(trait_ids)) {
  if (data_.rows() < 2) fail(ErrorKind::TooFewRows, "phenotype matrix needs at least 2 samples");
  if (data_.cols() < 1) fail(ErrorKind::DimensionMismatch, "phenotype matrix needs at least 1 trait");
  if (data_.cols() > data_.rows())
    fail(ErrorKind::DimensionMismatch, "more traits than samples");
  if (static_cast<Eigen::Index>(trait_ids_.size()) != data_.cols())
    fail(ErrorKind::DimensionMismatch, "trait id count does not match column count");
  check_finite(data_, "phenotype matrix");
  for (Eigen::Index k = 0; k < data_.cols(); ++k) {
    const double mean = data_.col(k).mean();
    if (std::abs(mean) > kCenterTol) {
      std::ostringstream os;
      os << "phenotype column " << k << " is not centered (mean " << mean << ")";
      fail(ErrorKind::NotCentered, os.str());
    }
  }
}

ModelParams::ModelParams(Vector a, Vector sigma2_beta, Matrix theta)
    : inclusion_probs(std::move(a)),
      slab_vars(std::move(sigma2_beta)),
      precision(std::move(theta)) {
  const Eigen::Index k = inclusion_probs.size();
  if (k < 1) fail(ErrorKind::DimensionMismatch, "need at least one trait");
  if (slab_vars.size() != k || precision.rows() != k || precision.cols() != k)
    fail(ErrorKind::DimensionMismatch, "parameter blocks disagree on trait count");
  if (!inclusion_probs.allFinite() || !slab_vars.allFinite() || !precision.allFinite())
    fail(ErrorKind::NonNumeric, "model parameters contain non-finite values");
  for (Eigen::Index i = 0; i < k; ++i) {
    inclusion_probs[i] = std::min(1.0 - kMinInclusion,
                                  std::max(kMinInclusion, inclusion_probs[i]));
    if (slab_vars[i] < kMinSlabVar) slab_vars[i] = kMinSlabVar;
  }
  const double scale = precision.cwiseAbs().maxCoeff();
  if ((precision - precision.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, scale))
    fail(ErrorKind::SingularCovariance, "precision matrix is not symmetric");
  precision = 0.5 * (precision + precision.transpose().eval());
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::SingularCovariance, "precision matrix is not positive definite");
}

bool ModelParams::precision_is_diagonal() const {
  const Eigen::Index k = precision.rows();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (i != j && precision(i, j) != 0.0) return false;
  return true;
}

Matrix VariationalState::residuals_from_scratch(const Matrix& mu,
                                                const Matrix& alpha,
                                                const GenotypeMatrix& geno,
                                                const PhenotypeMatrix& pheno) {
  Matrix r(pheno.n_samples(), pheno.n_traits());
  for (Eigen::Index k = 0; k < pheno.n_traits(); ++k) {
    Vector col = pheno.data().col(k);
    if (geno.n_snps() > 0)
      col.noalias() -= geno.data() * alpha.col(k).cwiseProduct(mu.col(k));
    r.col(k) = col;
  }
  return r;
}

double VariationalState::residual_cache_error(const GenotypeMatrix& geno,
                                              const PhenotypeMatrix& pheno) const {
  const Matrix fresh = residuals_from_scratch(mu, alpha, geno, pheno);
  return (residuals - fresh).cwiseAbs().maxCoeff();
}

void validate_dataset(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno) {
  if (geno.n_samples() != pheno.n_samples())
    fail(ErrorKind::DimensionMismatch, "genotype and phenotype sample counts differ");
}

}  // namespace vimco

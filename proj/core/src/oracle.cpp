#include "vimco/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "vimco/math.hpp"

namespace vimco {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// log N(y; 0, cov) with cov built explicitly as the NK x NK matrix
// (Theta^-1 kron I_N) + A_active * D * A_active^T, trait-major stacking.
struct DenseCache {
  Matrix base_cov;  // Theta^-1 kron I_N
  Vector y;         // stacked traits
};

DenseCache make_dense_cache(const GenotypeMatrix& geno,
                            const PhenotypeMatrix& pheno,
                            const ModelParams& params) {
  const Eigen::Index n = geno.n_samples();
  const Eigen::Index k = pheno.n_traits();
  const Matrix theta_inv = params.precision.llt().solve(Matrix::Identity(k, k));
  DenseCache c;
  c.base_cov.setZero(n * k, n * k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      c.base_cov.block(a * n, b * n, n, n).diagonal().setConstant(theta_inv(a, b));
  c.y.resize(n * k);
  for (Eigen::Index t = 0; t < k; ++t) c.y.segment(t * n, n) = pheno.data().col(t);
  return c;
}

double dense_config_loglik(const DenseCache& cache, const GenotypeMatrix& geno,
                           const PhenotypeMatrix& pheno,
                           const ModelParams& params, uint32_t mask) {
  const Eigen::Index n = geno.n_samples();
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index k = pheno.n_traits();
  const Eigen::Index nk = n * k;

  Matrix cov = cache.base_cov;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index t = 0; t < k; ++t) {
      if (!(mask >> (j * k + t) & 1u)) continue;
      // active effect (j,t) adds sigma2_beta_t * X_j X_j^T to trait block t
      cov.block(t * n, t * n, n, n).noalias() +=
          params.slab_vars[t] * geno.data().col(j) * geno.data().col(j).transpose();
    }
  }

  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::SingularCovariance, "configuration covariance is not positive definite");
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = cache.y.dot(llt.solve(cache.y));
  return -0.5 * (static_cast<double>(nk) * kLogTwoPi + log_det + quad);
}

// Same density via the matrix inversion / determinant lemmas, operating only
// on the m active effects: with C = Theta^-1 kron I_N,
//   (A^T C^-1 A)[(j,t),(j',t')] = theta_{tt'} X_j.X_j'
//   (A^T C^-1 y)[(j,t)]         = sum_u theta_{tu} X_j.Y_u
//   y^T C^-1 y                  = tr(Theta Y^T Y)
struct WoodburyCache {
  Matrix gram;     // X^T X
  Matrix xty;      // X^T Y
  Matrix yty;      // Y^T Y
  double base_quad = 0.0;  // y^T C^-1 y
  double log_det_theta = 0.0;
};

WoodburyCache make_woodbury_cache(const GenotypeMatrix& geno,
                                  const PhenotypeMatrix& pheno,
                                  const ModelParams& params) {
  WoodburyCache c;
  c.gram = geno.data().transpose() * geno.data();
  c.xty = geno.data().transpose() * pheno.data();
  c.yty = pheno.data().transpose() * pheno.data();
  c.base_quad = (params.precision.cwiseProduct(c.yty)).sum();
  Eigen::LLT<Matrix> llt(params.precision);
  c.log_det_theta =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return c;
}

double woodbury_config_loglik(const WoodburyCache& cache,
                              const GenotypeMatrix& geno,
                              const PhenotypeMatrix& pheno,
                              const ModelParams& params, uint32_t mask) {
  const Eigen::Index n = geno.n_samples();
  const Eigen::Index k = pheno.n_traits();
  const Eigen::Index nk = n * k;

  std::vector<std::pair<Eigen::Index, Eigen::Index>> active;  // (snp, trait)
  for (Eigen::Index j = 0; j < geno.n_snps(); ++j)
    for (Eigen::Index t = 0; t < k; ++t)
      if (mask >> (j * k + t) & 1u) active.emplace_back(j, t);

  const double base =
      -0.5 * (static_cast<double>(nk) * kLogTwoPi - n * cache.log_det_theta +
              cache.base_quad);
  if (active.empty()) return base;

  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  Matrix atc_a(m, m);  // A^T C^-1 A
  Vector atc_y(m);     // A^T C^-1 y
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto [j, t] = active[static_cast<size_t>(r)];
    for (Eigen::Index s = 0; s < m; ++s) {
      const auto [j2, t2] = active[static_cast<size_t>(s)];
      atc_a(r, s) = params.precision(t, t2) * cache.gram(j, j2);
    }
    double acc = 0.0;
    for (Eigen::Index u = 0; u < k; ++u)
      acc += params.precision(t, u) * cache.xty(j, u);
    atc_y[r] = acc;
  }

  Matrix d_inv = Matrix::Zero(m, m);
  double log_det_d = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double v = params.slab_vars[active[static_cast<size_t>(r)].second];
    d_inv(r, r) = 1.0 / v;
    log_det_d += std::log(v);
  }

  const Matrix inner = d_inv + atc_a;
  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::SingularCovariance, "Woodbury inner matrix is not positive definite");
  const double log_det_inner =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  // det(C + A D A^T) = det(C) det(D) det(D^-1 + A^T C^-1 A)
  const double log_det_cov =
      -n * cache.log_det_theta + log_det_d + log_det_inner;
  const double quad = cache.base_quad - atc_y.dot(llt.solve(atc_y));
  return -0.5 * (static_cast<double>(nk) * kLogTwoPi + log_det_cov + quad);
}

}  // namespace

ExactPosterior exact_posterior(const GenotypeMatrix& geno,
                               const PhenotypeMatrix& pheno,
                               const ModelParams& params, OraclePath path) {
  validate_dataset(geno, pheno);
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index k = pheno.n_traits();
  const Eigen::Index n = geno.n_samples();
  if (params.n_traits() != k)
    fail(ErrorKind::DimensionMismatch, "params trait count does not match phenotypes");
  if (p * k > 16) fail(ErrorKind::TooLarge, "oracle limit p*K <= 16 exceeded");
  if (n * k > 200) fail(ErrorKind::TooLarge, "oracle limit N*K <= 200 exceeded");

  Vector log_a(k), log_1ma(k);
  for (Eigen::Index t = 0; t < k; ++t) {
    log_a[t] = std::log(params.inclusion_probs[t]);
    log_1ma[t] = std::log1p(-params.inclusion_probs[t]);
  }

  const uint32_t n_configs = 1u << (p * k);
  WoodburyCache wcache;
  DenseCache dcache;
  if (path == OraclePath::kWoodbury)
    wcache = make_woodbury_cache(geno, pheno, params);
  else
    dcache = make_dense_cache(geno, pheno, params);

  std::vector<double> joint(n_configs);
  for (uint32_t mask = 0; mask < n_configs; ++mask) {
    double log_prior = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index t = 0; t < k; ++t)
        log_prior += (mask >> (j * k + t) & 1u) ? log_a[t] : log_1ma[t];
    const double log_lik =
        path == OraclePath::kDense
            ? dense_config_loglik(dcache, geno, pheno, params, mask)
            : woodbury_config_loglik(wcache, geno, pheno, params, mask);
    joint[mask] = log_prior + log_lik;
  }

  ExactPosterior out;
  out.log_marginal = log_sum_exp(joint);
  out.config_log_probs.resize(n_configs);
  out.inclusion_probs = Matrix::Zero(p, k);
  for (uint32_t mask = 0; mask < n_configs; ++mask) {
    out.config_log_probs[mask] = joint[mask] - out.log_marginal;
    const double prob = std::exp(out.config_log_probs[mask]);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index t = 0; t < k; ++t)
        if (mask >> (j * k + t) & 1u) out.inclusion_probs(j, t) += prob;
  }
  return out;
}

double exact_log_marginal(const GenotypeMatrix& geno,
                          const PhenotypeMatrix& pheno,
                          const ModelParams& params, OraclePath path) {
  return exact_posterior(geno, pheno, params, path).log_marginal;
}

}  // namespace vimco

#include "vimco/vbem.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vimco/math.hpp"

namespace vimco {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_update_finite(double mu, double s2, double alpha, Eigen::Index j,
                         Eigen::Index k) {
  if (std::isfinite(mu) && std::isfinite(s2) && std::isfinite(alpha)) return;
  std::ostringstream os;
  os << "non-finite E-step update at snp " << j << ", trait " << k << " (mu="
     << mu << ", s2=" << s2 << ", alpha=" << alpha << ")";
  fail(ErrorKind::NonFiniteUpdate, os.str());
}

// Refresh the residual cache column by column. The per-column arithmetic is
// what keeps diagonal-precision fits bit-compatible with per-trait fits.
void refresh_residuals(VariationalState& state, const GenotypeMatrix& geno,
                       const PhenotypeMatrix& pheno) {
  state.residuals = VariationalState::residuals_from_scratch(
      state.mu, state.alpha, geno, pheno);
}

Matrix assemble_precision_inverse(const VariationalState& state,
                                  const GenotypeMatrix& geno) {
  const Eigen::Index n = geno.n_samples();
  const Eigen::Index k = state.n_traits();
  // Entrywise dots (not a GEMM) so each diagonal entry is computed exactly
  // as the corresponding single-trait fit would compute it.
  Matrix m(k, k);
  for (Eigen::Index s = 0; s < k; ++s)
    for (Eigen::Index t = s; t < k; ++t)
      m(s, t) = m(t, s) =
          state.residuals.col(s).dot(state.residuals.col(t)) / double(n);
  for (Eigen::Index t = 0; t < k; ++t) {
    double corr = 0.0;
    for (Eigen::Index j = 0; j < geno.n_snps(); ++j) {
      const double a = state.alpha(j, t);
      const double mu = state.mu(j, t);
      corr += geno.col_sq_norms()[j] *
              (a * (mu * mu + state.s2(j, t)) - a * a * mu * mu);
    }
    m(t, t) += corr / double(n);
  }
  return m;
}

// Invert the assembled Theta^-1, adding diagonal jitter on Cholesky failure
// (up to 3 retries) before giving up.
Matrix invert_spd_with_jitter(Matrix m) {
  const Eigen::Index k = m.rows();
  const double jitter = 1e-8 * m.diagonal().mean();
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (attempt > 0) m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) {
      // the columnwise solve is asymmetric at rounding level; Theta must
      // stay exactly symmetric (checkpoint normalization relies on it)
      Matrix inv = llt.solve(Matrix::Identity(k, k));
      return 0.5 * (inv + inv.transpose().eval());
    }
  }
  fail(ErrorKind::SingularCovariance,
       "estimated error covariance is not positive definite after jitter");
}

}  // namespace

void update_coordinate(VariationalState& state, const ModelParams& params,
                       const GenotypeMatrix& geno, Eigen::Index j,
                       Eigen::Index k) {
  const double xsq = geno.col_sq_norms()[j];
  const double theta_kk = params.precision(k, k);
  const double s2 = 1.0 / (theta_kk * xsq + 1.0 / params.slab_vars[k]);

  // X_j^T (Y_t - sum_{j' != j} alpha mu X_j') = X_j^T R_t + [t == k] old
  // contribution; the off-trait numerator terms cancel against the residual
  // cache the same way.
  double num = theta_kk * state.alpha(j, k) * state.mu(j, k) * xsq;
  for (Eigen::Index t = 0; t < state.n_traits(); ++t) {
    const double theta_kt = params.precision(k, t);
    if (theta_kt == 0.0) continue;
    num += theta_kt * geno.data().col(j).dot(state.residuals.col(t));
  }
  const double mu = s2 * num;
  const double alpha = posterior_inclusion(
      log_prior_odds(params.inclusion_probs[k]), mu, s2, params.slab_vars[k]);
  check_update_finite(mu, s2, alpha, j, k);

  const double delta = alpha * mu - state.alpha(j, k) * state.mu(j, k);
  state.mu(j, k) = mu;
  state.s2(j, k) = s2;
  state.alpha(j, k) = alpha;
  if (delta != 0.0)
    state.residuals.col(k).noalias() -= delta * geno.data().col(j);
}

void e_step_sweep(VariationalState& state, const ModelParams& params,
                  const GenotypeMatrix& geno, const PhenotypeMatrix& pheno) {
  (void)pheno;
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index nk = state.n_traits();
  Vector d(nk);      // X_j^T R_t, kept current through the inner loop
  Vector delta(nk);  // accumulated change in alpha*mu per trait

  for (Eigen::Index j = 0; j < p; ++j) {
    const auto xj = geno.data().col(j);
    const double xsq = geno.col_sq_norms()[j];
    for (Eigen::Index t = 0; t < nk; ++t) d[t] = xj.dot(state.residuals.col(t));
    delta.setZero();

    for (Eigen::Index k = 0; k < nk; ++k) {
      const double theta_kk = params.precision(k, k);
      const double s2 = 1.0 / (theta_kk * xsq + 1.0 / params.slab_vars[k]);
      double num = theta_kk * state.alpha(j, k) * state.mu(j, k) * xsq;
      for (Eigen::Index t = 0; t < nk; ++t) {
        const double theta_kt = params.precision(k, t);
        if (theta_kt == 0.0) continue;
        num += theta_kt * d[t];
      }
      const double mu = s2 * num;
      const double alpha =
          posterior_inclusion(log_prior_odds(params.inclusion_probs[k]), mu,
                              s2, params.slab_vars[k]);
      check_update_finite(mu, s2, alpha, j, k);

      const double change = alpha * mu - state.alpha(j, k) * state.mu(j, k);
      state.mu(j, k) = mu;
      state.s2(j, k) = s2;
      state.alpha(j, k) = alpha;
      delta[k] += change;
      d[k] -= change * xsq;  // R_k shifted by -change * X_j
    }

    for (Eigen::Index k = 0; k < nk; ++k)
      if (delta[k] != 0.0)
        state.residuals.col(k).noalias() -= delta[k] * xj;
  }
}

void e_step_sweep(VariationalState& state, const ModelParams& params,
                  const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
                  const CoordinateOrder& order) {
  (void)pheno;
  for (const auto& [j, k] : order) update_coordinate(state, params, geno, j, k);
}

void m_step(VariationalState& state, ModelParams& params,
            const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
            FitMode mode) {
  (void)pheno;
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index nk = state.n_traits();

  if (p > 0) {
    for (Eigen::Index k = 0; k < nk; ++k) {
      const double sum_alpha = state.alpha.col(k).sum();
      params.inclusion_probs[k] =
          std::clamp(sum_alpha / double(p), ModelParams::kMinInclusion,
                     1.0 - ModelParams::kMinInclusion);
      if (sum_alpha >= 1e-12) {
        const double weighted =
            (state.alpha.col(k).array() *
             (state.mu.col(k).array().square() + state.s2.col(k).array()))
                .sum();
        params.slab_vars[k] =
            std::max(weighted / sum_alpha, ModelParams::kMinSlabVar);
      }
      // sum_alpha ~ 0: slab variance is unidentified, keep the old value
    }
  }

  Matrix theta_inv = assemble_precision_inverse(state, geno);
  if (mode == FitMode::kDiagonalPrecision) {
    Matrix theta = Matrix::Zero(nk, nk);
    for (Eigen::Index k = 0; k < nk; ++k) {
      if (theta_inv(k, k) <= 0.0)
        fail(ErrorKind::SingularCovariance,
             "non-positive per-trait residual variance");
      theta(k, k) = 1.0 / theta_inv(k, k);
    }
    params.precision = theta;
  } else {
    params.precision = invert_spd_with_jitter(std::move(theta_inv));
  }
}

ElboTerms elbo_decomposed(const VariationalState& state,
                          const ModelParams& params,
                          const GenotypeMatrix& geno,
                          const PhenotypeMatrix& pheno) {
  const Eigen::Index n = pheno.n_samples();
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index nk = state.n_traits();

  ElboTerms t{};
  const Matrix rgram = state.residuals.transpose() * state.residuals;
  t.residual_quad = -0.5 * params.precision.cwiseProduct(rgram).sum();

  t.variance_corr = 0.0;
  for (Eigen::Index k = 0; k < nk; ++k) {
    double corr = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double a = state.alpha(j, k);
      const double mu = state.mu(j, k);
      corr += geno.col_sq_norms()[j] *
              (a * (mu * mu + state.s2(j, k)) - a * a * mu * mu);
    }
    t.variance_corr -= 0.5 * params.precision(k, k) * corr;
  }

  t.bernoulli_kl = 0.0;
  t.slab_kl = 0.0;
  for (Eigen::Index k = 0; k < nk; ++k) {
    const double a = params.inclusion_probs[k];
    const double sb2 = params.slab_vars[k];
    for (Eigen::Index j = 0; j < p; ++j) {
      const double alpha = state.alpha(j, k);
      t.bernoulli_kl -= kl_bernoulli(alpha, a);
      const double mu = state.mu(j, k);
      const double s2 = state.s2(j, k);
      t.slab_kl +=
          0.5 * alpha * (1.0 + std::log(s2 / sb2) - (mu * mu + s2) / sb2);
    }
  }

  Eigen::LLT<Matrix> llt(params.precision);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::SingularCovariance, "precision lost positive definiteness");
  t.log_det = double(n) *
              llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  t.constant = -0.5 * double(n) * double(nk) * kLogTwoPi;

  if (!std::isfinite(t.total()))
    fail(ErrorKind::NonFiniteElbo, "ELBO evaluated to a non-finite value");
  return t;
}

double elbo(const VariationalState& state, const ModelParams& params,
            const GenotypeMatrix& geno, const PhenotypeMatrix& pheno) {
  return elbo_decomposed(state, params, geno, pheno).total();
}

WarmStart null_init(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno) {
  const Eigen::Index n = pheno.n_samples();
  const Eigen::Index p = geno.n_snps();
  const Eigen::Index nk = pheno.n_traits();

  Vector var_y(nk);
  for (Eigen::Index k = 0; k < nk; ++k)
    var_y[k] = pheno.data().col(k).squaredNorm() / double(n);

  WarmStart w;
  w.params = ModelParams(Vector::Constant(nk, 0.01), 0.1 * var_y,
                         var_y.cwiseInverse().asDiagonal());
  w.state.mu = Matrix::Zero(p, nk);
  w.state.s2 = Matrix::Zero(p, nk);
  w.state.alpha = Matrix::Zero(p, nk);
  for (Eigen::Index k = 0; k < nk; ++k) {
    w.state.s2.col(k).setConstant(w.params.slab_vars[k]);
    w.state.alpha.col(k).setConstant(w.params.inclusion_probs[k]);
  }
  w.state.residuals = pheno.data();  // mu = 0 so R = Y exactly
  return w;
}

FitResult fit(const GenotypeMatrix& geno, const PhenotypeMatrix& pheno,
              const FitConfig& config) {
  validate_dataset(geno, pheno);
  if (config.max_iters < 1)
    fail(ErrorKind::InvalidConfig, "max_iters must be at least 1");
  if (!(config.elbo_rel_tol > 0.0))
    fail(ErrorKind::InvalidConfig, "elbo_rel_tol must be positive");

  FitResult r;
  if (config.warm_start) {
    r.state = config.warm_start->state;
    r.params = config.warm_start->params;
    if (r.state.n_snps() != geno.n_snps() ||
        r.state.n_traits() != pheno.n_traits() ||
        r.params.n_traits() != pheno.n_traits())
      fail(ErrorKind::DimensionMismatch, "warm start does not match dataset");
    refresh_residuals(r.state, geno, pheno);
  } else {
    WarmStart w = null_init(geno, pheno);
    r.state = std::move(w.state);
    r.params = std::move(w.params);
  }
  if (config.mode == FitMode::kDiagonalPrecision &&
      !r.params.precision_is_diagonal())
    fail(ErrorKind::InvalidConfig,
         "diagonal-precision fit started from a non-diagonal precision");

  std::mt19937_64 rng(config.seed);
  CoordinateOrder order;
  if (config.shuffle_coordinates) {
    order.reserve(size_t(geno.n_snps()) * size_t(pheno.n_traits()));
    for (Eigen::Index j = 0; j < geno.n_snps(); ++j)
      for (Eigen::Index k = 0; k < pheno.n_traits(); ++k)
        order.emplace_back(j, k);
  }

  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iters; ++it) {
    if (config.shuffle_coordinates) {
      std::shuffle(order.begin(), order.end(), rng);
      e_step_sweep(r.state, r.params, geno, pheno, order);
    } else {
      e_step_sweep(r.state, r.params, geno, pheno);
    }
    refresh_residuals(r.state, geno, pheno);
    m_step(r.state, r.params, geno, pheno, config.mode);

    const double l = elbo(r.state, r.params, geno, pheno);
    r.elbo_trace.push_back(l);
    r.n_iters = it + 1;
    if (it > 0 && std::abs(l - prev) / (std::abs(prev) + 1.0) <
                      config.elbo_rel_tol) {
      r.converged = true;
      break;
    }
    prev = l;
  }
  return r;
}

}  // namespace vimco

#include "vimco/simgen.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vimco/math.hpp"

namespace vimco {

namespace {

void check_unit_interval(double x, const char* name, bool open_right) {
  const bool ok = x >= 0.0 && (open_right ? x < 1.0 : x <= 1.0);
  if (!ok) fail(ErrorKind::InvalidConfig, std::string(name) + " out of range");
}

std::vector<std::string> numbered_ids(const char* stem, Eigen::Index n) {
  std::vector<std::string> ids;
  ids.reserve(size_t(n));
  for (Eigen::Index i = 0; i < n; ++i)
    ids.push_back(stem + std::to_string(i + 1));
  return ids;
}

}  // namespace

GeneratedGenotypes gen_genotypes(Eigen::Index n_samples, Eigen::Index n_snps,
                                 double rho_x,
                                 std::pair<double, double> maf_range,
                                 std::mt19937_64& rng) {
  check_unit_interval(rho_x, "rho_x", true);
  if (n_samples < 2 || n_snps < 1)
    fail(ErrorKind::InvalidConfig, "need at least 2 samples and 1 SNP");
  if (!(maf_range.first > 0.0 && maf_range.first < maf_range.second &&
        maf_range.second <= 0.5))
    fail(ErrorKind::InvalidConfig, "maf range must satisfy 0 < lo < hi <= 0.5");

  const boost::math::normal_distribution<double> std_normal;
  std::uniform_real_distribution<double> maf_draw(maf_range.first,
                                                  maf_range.second);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vector maf(n_snps), thr_two(n_snps), thr_one(n_snps);
  for (Eigen::Index j = 0; j < n_snps; ++j) {
    const double f = maf_draw(rng);
    maf[j] = f;
    thr_two[j] = boost::math::quantile(std_normal, f * f);
    thr_one[j] = boost::math::quantile(std_normal, f * f + 2.0 * f * (1.0 - f));
  }

  RawDosages raw(n_samples, n_snps);
  const double innov = std::sqrt(1.0 - rho_x * rho_x);
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < n_snps; ++j) {
      const double eps = gauss(rng);
      z = j == 0 ? eps : rho_x * z + innov * eps;
      raw(n, j) = z < thr_two[j] ? int8_t(2) : z < thr_one[j] ? int8_t(1)
                                                              : int8_t(0);
    }
  }

  Matrix centered = center_columns(raw.cast<double>());
  return GeneratedGenotypes{
      GenotypeMatrix(std::move(centered), numbered_ids("snp", n_snps)),
      std::move(raw), std::move(maf)};
}

SparseEffects gen_effects(Eigen::Index n_snps, Eigen::Index n_traits,
                          double causal_frac, double pleiotropy_g,
                          std::mt19937_64& rng) {
  check_unit_interval(pleiotropy_g, "pleiotropy_g", true);
  if (n_traits < 1) fail(ErrorKind::InvalidConfig, "need at least 1 trait");
  const Eigen::Index m = Eigen::Index(std::lround(causal_frac * double(n_snps)));
  if (m < 1)
    fail(ErrorKind::InvalidConfig, "causal_frac * p must round to at least 1");

  // s SNPs are causal for exactly two traits; every other causal SNP is
  // exclusive to one trait, so s / (m*K) is the realized pleiotropy level.
  const Eigen::Index total = m * n_traits;
  const Eigen::Index s = Eigen::Index(std::lround(pleiotropy_g * double(total)));
  if (s > 0 && n_traits < 2)
    fail(ErrorKind::InfeasiblePleiotropy, "sharing needs at least 2 traits");

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index a = 0; a < n_traits; ++a)
    for (Eigen::Index b = a + 1; b < n_traits; ++b) pairs.emplace_back(a, b);

  std::vector<Eigen::Index> shared_per_trait(size_t(n_traits), 0);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shared_pair_of(static_cast<size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto pr = pairs[size_t(i) % pairs.size()];
    shared_pair_of[size_t(i)] = pr;
    ++shared_per_trait[size_t(pr.first)];
    ++shared_per_trait[size_t(pr.second)];
  }
  for (Eigen::Index k = 0; k < n_traits; ++k)
    if (shared_per_trait[size_t(k)] > m)
      fail(ErrorKind::InfeasiblePleiotropy,
           "target g assigns a trait more shared SNPs than causal slots");

  const Eigen::Index distinct = total - s;  // each share merges two slots
  if (distinct > n_snps)
    fail(ErrorKind::InfeasiblePleiotropy,
         "not enough SNPs for the requested causal count");

  std::vector<Eigen::Index> all(static_cast<size_t>(n_snps));
  std::iota(all.begin(), all.end(), Eigen::Index(0));
  std::vector<Eigen::Index> chosen;
  chosen.reserve(size_t(distinct));
  std::sample(all.begin(), all.end(), std::back_inserter(chosen),
              size_t(distinct), rng);
  std::shuffle(chosen.begin(), chosen.end(), rng);  // decouple role from locus

  SparseEffects truth;
  truth.gamma.setZero(n_snps, n_traits);
  truth.beta_tilde = Matrix::Zero(n_snps, n_traits);

  size_t next = 0;
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto [a, b] = shared_pair_of[size_t(i)];
    const Eigen::Index j = chosen[next++];
    truth.gamma(j, a) = 1;
    truth.gamma(j, b) = 1;
  }
  for (Eigen::Index k = 0; k < n_traits; ++k) {
    const Eigen::Index exclusive = m - shared_per_trait[size_t(k)];
    for (Eigen::Index i = 0; i < exclusive; ++i)
      truth.gamma(chosen[next++], k) = 1;
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index j = 0; j < n_snps; ++j)
    for (Eigen::Index k = 0; k < n_traits; ++k)
      if (truth.gamma(j, k)) truth.beta_tilde(j, k) = gauss(rng);
  return truth;
}

double realized_pleiotropy(const SparseEffects& truth) {
  Eigen::Index multi = 0, total = 0;
  for (Eigen::Index j = 0; j < truth.n_snps(); ++j) {
    const Eigen::Index row = truth.gamma.row(j).sum();
    total += row;
    if (row >= 2) ++multi;
  }
  if (total == 0) fail(ErrorKind::NoCausalSnp, "no causal SNP in truth");
  return double(multi) / double(total);
}

PhenotypeMatrix gen_errors_and_traits(const GenotypeMatrix& geno,
                                      const SparseEffects& truth,
                                      double rho_e, double h2,
                                      std::mt19937_64& rng) {
  check_unit_interval(rho_e, "rho_e", true);
  if (!(h2 > 0.0 && h2 < 1.0))
    fail(ErrorKind::InvalidConfig, "heritability must lie in (0,1)");
  if (truth.n_snps() != geno.n_snps())
    fail(ErrorKind::DimensionMismatch, "truth and genotypes disagree on p");

  const Eigen::Index n = geno.n_samples();
  const Eigen::Index k = truth.n_traits();
  const Matrix signal = geno.data() * truth.beta();

  Vector err_sd(k);
  for (Eigen::Index t = 0; t < k; ++t) {
    if ((truth.gamma.col(t).array() == 0).all()) {
      std::ostringstream os;
      os << "trait " << t << " has no causal SNP; error scale is undefined";
      fail(ErrorKind::NoCausalSnp, os.str());
    }
    // columns of X are centered, so the signal column is centered too
    const double var_g = signal.col(t).squaredNorm() / double(n);
    err_sd[t] = std::sqrt(var_g * (1.0 - h2) / h2);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho_e * rho_e);
  Matrix y = signal;
  for (Eigen::Index row = 0; row < n; ++row) {
    double u = 0.0;
    for (Eigen::Index t = 0; t < k; ++t) {
      const double eps = gauss(rng);
      u = t == 0 ? eps : rho_e * u + innov * eps;
      y(row, t) += err_sd[t] * u;
    }
  }
  return PhenotypeMatrix(center_columns(y), numbered_ids("trait", k));
}

SimDataset simulate(const SimConfig& config) {
  std::mt19937_64 rng(config.seed);
  GeneratedGenotypes g =
      gen_genotypes(config.n_samples, config.n_snps, config.rho_x,
                    config.maf_range, rng);
  SparseEffects truth = gen_effects(config.n_snps, config.n_traits,
                                    config.causal_frac, config.pleiotropy_g,
                                    rng);
  PhenotypeMatrix pheno =
      gen_errors_and_traits(g.centered, truth, config.rho_e, config.h2, rng);

  SimDataset data{std::move(g.centered), std::move(pheno), std::move(truth),
                  0.0, std::move(g.raw), std::move(g.maf)};
  data.realized_g = realized_pleiotropy(data.truth);
  return data;
}

}  // namespace vimco

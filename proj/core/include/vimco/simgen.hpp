#ifndef VIMCO_SIMGEN_HPP
#define VIMCO_SIMGEN_HPP

#include <cstdint>
#include <random>
#include <utility>

#include "vimco/types.hpp"

namespace vimco {

struct SimConfig {
  Eigen::Index n_samples = 5000;
  Eigen::Index n_snps = 10000;
  Eigen::Index n_traits = 4;
  double rho_x = 0.5;        // genotype AR(1) parameter, in [0,1)
  double rho_e = 0.5;        // error AR(1) parameter across traits, in [0,1)
  double causal_frac = 0.01;
  double pleiotropy_g = 0.0;  // target share of multi-trait causal SNPs
  double h2 = 0.3;            // per-trait heritability, in (0,1)
  std::pair<double, double> maf_range{0.05, 0.5};
  uint64_t seed = 0;
};

using RawDosages = Eigen::Matrix<int8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Centered dosages plus the raw {0,1,2} matrix and the allele frequencies
/// they were discretized from (kept for HWE checks and file export).
struct GeneratedGenotypes {
  GenotypeMatrix centered;
  RawDosages raw;
  Vector maf;
};

struct SimDataset {
  GenotypeMatrix geno;
  PhenotypeMatrix pheno;
  SparseEffects truth;
  double realized_g = 0.0;
  RawDosages raw;  // pre-centering dosages, for export
  Vector maf;
};

/// Latent AR(1) rows discretized to {0,1,2} under Hardy-Weinberg
/// proportions (f^2, 2f(1-f), (1-f)^2) with f drawn per SNP, then centered.
/// Genotype 2 sits at the lower tail of the latent variable.
GeneratedGenotypes gen_genotypes(Eigen::Index n_samples, Eigen::Index n_snps,
                                 double rho_x,
                                 std::pair<double, double> maf_range,
                                 std::mt19937_64& rng);

/// Sparse effects with exactly round(causal_frac * p) causal SNPs per trait
/// and round(g * m * K) SNPs shared between trait pairs (round-robin over
/// pairs, no triple sharing); effects are standard normal.
SparseEffects gen_effects(Eigen::Index n_snps, Eigen::Index n_traits,
                          double causal_frac, double pleiotropy_g,
                          std::mt19937_64& rng);

/// count of SNPs associated with two or more traits, divided by the total
/// number of (SNP, trait) associations
double realized_pleiotropy(const SparseEffects& truth);

/// Adds AR(1)-correlated errors, each trait's error variance set from the
/// realized signal variance so Var(signal)/Var(trait) targets h2, then
/// centers.
PhenotypeMatrix gen_errors_and_traits(const GenotypeMatrix& geno,
                                      const SparseEffects& truth,
                                      double rho_e, double h2,
                                      std::mt19937_64& rng);

/// Composes the three generators; bit-identical output for equal configs.
SimDataset simulate(const SimConfig& config);

}  // namespace vimco

#endif

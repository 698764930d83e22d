#ifndef VIMCO_STUDY_HPP
#define VIMCO_STUDY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vimco/inference.hpp"
#include "vimco/simgen.hpp"
#include "vimco/vbem.hpp"

namespace vimco {

/// The default modeling protocol: a diagonal-precision fit from the null
/// start (the single-trait baseline), then a full-precision fit warm
/// started from it.
struct TwoPhaseResult {
  FitResult diagonal;
  FitResult full;
};

TwoPhaseResult fit_two_phase(const GenotypeMatrix& geno,
                             const PhenotypeMatrix& pheno,
                             const FitConfig& base = {});

/// One point of the replicated simulation study grid.
struct StudyCell {
  double rho_x = 0.8;
  double rho_e = 0.5;
  double g = 0.0;
};

struct StudyConfig {
  Eigen::Index n_samples = 500;  // desk-scale defaults
  Eigen::Index n_snps = 1000;
  Eigen::Index n_traits = 4;
  double causal_frac = 0.01;
  double h2 = 0.3;
  double target_fdr = 0.1;
  double ld_r2 = 0.5;
  int ld_window = 100;
  int max_iters = 600;
  double elbo_rel_tol = 1e-6;
  uint64_t base_seed = 0;
};

/// Scores for both methods and both hypotheses on one simulated replicate.
struct ReplicateResult {
  int replicate = 0;
  StudyCell cell;
  EvalMetrics vimco_h0a, vimco_h0b;
  EvalMetrics bvsr_h0a, bvsr_h0b;
};

/// Simulates one replicate (independent seed stream per (cell, replicate)),
/// fits the two-phase protocol, and scores rejections at the configured
/// FDR target. Deterministic; replicates may run concurrently.
ReplicateResult run_replicate(const StudyConfig& config, const StudyCell& cell,
                              int replicate);

/// One long-format output row per (replicate, method, hypothesis).
struct StudyRow {
  int replicate;
  std::string method;      // vimco | bvsr
  std::string hypothesis;  // h0a | h0b
  StudyCell cell;
  EvalMetrics metrics;
};

std::vector<StudyRow> rows_of(const ReplicateResult& r);

}  // namespace vimco

#endif

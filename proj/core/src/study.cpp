#include "vimco/study.hpp"

#include <bit>

#include "vimco/math.hpp"

namespace vimco {

TwoPhaseResult fit_two_phase(const GenotypeMatrix& geno,
                             const PhenotypeMatrix& pheno,
                             const FitConfig& base) {
  FitConfig phase1 = base;
  phase1.mode = FitMode::kDiagonalPrecision;
  phase1.warm_start.reset();
  TwoPhaseResult out{fit(geno, pheno, phase1), {}};

  FitConfig phase2 = base;
  phase2.mode = FitMode::kFull;
  phase2.warm_start = WarmStart{out.diagonal.state, out.diagonal.params};
  out.full = fit(geno, pheno, phase2);
  return out;
}

namespace {

uint64_t cell_stream(const StudyCell& cell, int replicate) {
  uint64_t s = std::bit_cast<uint64_t>(cell.rho_x);
  s = splitmix64(s ^ std::bit_cast<uint64_t>(cell.rho_e));
  s = splitmix64(s ^ std::bit_cast<uint64_t>(cell.g));
  return splitmix64(s ^ uint64_t(replicate));
}

EvalMetrics score_h0b(const AssociationReport& report,
                      const SparseEffects& truth, const LdBlocks& blocks,
                      const Matrix& alpha) {
  const Vector snp_scores = alpha.rowwise().maxCoeff();
  return evaluate_h0b(reject_h0b(report.rejections), truth, blocks,
                      snp_scores);
}

}  // namespace

ReplicateResult run_replicate(const StudyConfig& config, const StudyCell& cell,
                              int replicate) {
  SimConfig sim;
  sim.n_samples = config.n_samples;
  sim.n_snps = config.n_snps;
  sim.n_traits = config.n_traits;
  sim.rho_x = cell.rho_x;
  sim.rho_e = cell.rho_e;
  sim.pleiotropy_g = cell.g;
  sim.causal_frac = config.causal_frac;
  sim.h2 = config.h2;
  sim.seed = mix_seed(config.base_seed, cell_stream(cell, replicate));
  const SimDataset data = simulate(sim);

  FitConfig base;
  base.max_iters = config.max_iters;
  base.elbo_rel_tol = config.elbo_rel_tol;
  const TwoPhaseResult fits = fit_two_phase(data.geno, data.pheno, base);

  const LdBlocks blocks =
      ld_blocks_from_genotypes(data.geno, config.ld_r2, config.ld_window);

  ReplicateResult r;
  r.replicate = replicate;
  r.cell = cell;

  const AssociationReport vimco =
      select_associations(fits.full.state.alpha, config.target_fdr);
  r.vimco_h0a = evaluate(vimco.rejections, data.truth, blocks,
                         fits.full.state.alpha);
  r.vimco_h0b = score_h0b(vimco, data.truth, blocks, fits.full.state.alpha);

  const AssociationReport bvsr =
      select_associations(fits.diagonal.state.alpha, config.target_fdr);
  r.bvsr_h0a = evaluate(bvsr.rejections, data.truth, blocks,
                        fits.diagonal.state.alpha);
  r.bvsr_h0b =
      score_h0b(bvsr, data.truth, blocks, fits.diagonal.state.alpha);
  return r;
}

std::vector<StudyRow> rows_of(const ReplicateResult& r) {
  return {
      {r.replicate, "vimco", "h0a", r.cell, r.vimco_h0a},
      {r.replicate, "vimco", "h0b", r.cell, r.vimco_h0b},
      {r.replicate, "bvsr", "h0a", r.cell, r.bvsr_h0a},
      {r.replicate, "bvsr", "h0b", r.cell, r.bvsr_h0b},
  };
}

}  // namespace vimco

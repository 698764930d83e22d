#ifndef VIMCO_INFERENCE_HPP
#define VIMCO_INFERENCE_HPP

#include <cstddef>
#include <vector>

#include "vimco/types.hpp"

namespace vimco {

/// Assignment of each SNP to a linkage-disequilibrium block.
struct LdBlocks {
  std::vector<Eigen::Index> block_of;  // one entry per SNP, ids dense from 0
  Eigen::Index n_blocks = 0;
};

struct EvalMetrics {
  double power = 0.0;
  double empirical_fdr = 0.0;
  double auc = 0.0;
};

/// Local false discovery rate: entrywise 1 - alpha.
Matrix lfdr_from_alpha(const Matrix& alpha);

struct FdrSelection {
  double xi = -1.0;                  // lfdr cutoff; -1 means reject nothing
  std::vector<size_t> rejections;    // indices into the input list
};

/// Largest observed lfdr value xi such that the mean lfdr over
/// {lfdr <= xi} stays <= target. Ties enter or leave as a group.
FdrSelection fdr_threshold(const std::vector<double>& lfdr_values,
                           double target);

/// Matrix-shaped wrapper over fdr_threshold producing the full report.
AssociationReport select_associations(const Matrix& alpha, double target_fdr);

/// Union rule: a SNP is rejected if any of its traits is rejected.
std::vector<Eigen::Index> reject_h0b(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& rejections_h0a);

/// Greedy left-to-right blocking: a SNP joins the current block while its
/// squared correlation with the block's first SNP is >= r2_threshold and
/// the block is shorter than max_window.
LdBlocks ld_blocks_from_genotypes(const GenotypeMatrix& geno,
                                  double r2_threshold = 0.5,
                                  int max_window = 100);

/// Area under the ROC curve by the Mann-Whitney rank-sum formula with
/// midranks for ties. truth entries are 0/1; NoPositives if they are all
/// equal.
double auc_rank_sum(const std::vector<double>& scores,
                    const std::vector<int>& truth);

/// Scores per-(SNP, trait) rejections against the ground truth. Power is
/// counted over individual true associations; the empirical FDR groups
/// rejections by (LD block, trait) and calls a group false when its block
/// holds no causal SNP for that trait; AUC ranks the score matrix against
/// the truth indicators.
EvalMetrics evaluate(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& rejections,
    const SparseEffects& truth, const LdBlocks& blocks, const Matrix& scores);

/// Same scoring for the per-SNP hypothesis: a SNP is truly associated if
/// any trait is causal, a rejected block is false when it holds no causal
/// SNP at all, and scores collapse to one value per SNP.
EvalMetrics evaluate_h0b(const std::vector<Eigen::Index>& rejected_snps,
                         const SparseEffects& truth, const LdBlocks& blocks,
                         const Vector& scores);

}  // namespace vimco

#endif

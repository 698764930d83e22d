#include "vimco/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace vimco {

Matrix lfdr_from_alpha(const Matrix& alpha) {
  if ((alpha.array() < 0.0).any() || (alpha.array() > 1.0).any())
    fail(ErrorKind::InvalidConfig, "alpha entries must lie in [0,1]");
  return Matrix::Ones(alpha.rows(), alpha.cols()) - alpha;
}

FdrSelection fdr_threshold(const std::vector<double>& lfdr_values,
                           double target) {
  if (!(target > 0.0 && target < 1.0))
    fail(ErrorKind::InvalidConfig, "target FDR must lie in (0,1)");

  FdrSelection out;
  const size_t n = lfdr_values.size();
  if (n == 0) return out;

  std::vector<double> sorted = lfdr_values;
  std::sort(sorted.begin(), sorted.end());

  // Walk tie groups in ascending order; a cutoff is admissible when the
  // running mean of everything at or below it still meets the target.
  double cum = 0.0;
  size_t i = 0;
  bool found = false;
  while (i < n) {
    size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    cum += std::accumulate(sorted.begin() + long(i), sorted.begin() + long(j), 0.0);
    // multiplied-out form: keeps tie groups sitting exactly at the target
    if (cum <= target * double(j)) {
      out.xi = sorted[i];
      found = true;
    }
    i = j;
  }
  if (!found) return out;

  for (size_t idx = 0; idx < n; ++idx)
    if (lfdr_values[idx] <= out.xi) out.rejections.push_back(idx);
  return out;
}

AssociationReport select_associations(const Matrix& alpha, double target_fdr) {
  AssociationReport report;
  report.lfdr = lfdr_from_alpha(alpha);
  report.target_fdr = target_fdr;

  const Eigen::Index p = alpha.rows();
  const Eigen::Index k = alpha.cols();
  std::vector<double> flat;
  flat.reserve(size_t(p) * size_t(k));
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index t = 0; t < k; ++t)
      flat.push_back(report.lfdr(j, t));

  const FdrSelection sel = fdr_threshold(flat, target_fdr);
  report.threshold_xi = sel.xi;
  for (size_t idx : sel.rejections)
    report.rejections.emplace_back(Eigen::Index(idx) / k,
                                   Eigen::Index(idx) % k);
  return report;
}

std::vector<Eigen::Index> reject_h0b(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& rejections_h0a) {
  std::set<Eigen::Index> snps;
  for (const auto& [j, k] : rejections_h0a) snps.insert(j);
  return {snps.begin(), snps.end()};
}

LdBlocks ld_blocks_from_genotypes(const GenotypeMatrix& geno,
                                  double r2_threshold, int max_window) {
  if (!(r2_threshold > 0.0 && r2_threshold < 1.0))
    fail(ErrorKind::InvalidConfig, "r2 threshold must lie in (0,1)");
  if (max_window < 1)
    fail(ErrorKind::InvalidConfig, "max_window must be at least 1");

  LdBlocks blocks;
  const Eigen::Index p = geno.n_snps();
  blocks.block_of.resize(size_t(p));
  if (p == 0) return blocks;

  Eigen::Index anchor = 0;  // first SNP of the current block
  Eigen::Index block = 0;
  Eigen::Index length = 1;
  blocks.block_of[0] = 0;
  for (Eigen::Index j = 1; j < p; ++j) {
    const double dot = geno.data().col(anchor).dot(geno.data().col(j));
    const double r2 = dot * dot / (geno.col_sq_norms()[anchor] *
                                   geno.col_sq_norms()[j]);
    if (r2 >= r2_threshold && length < max_window) {
      ++length;
    } else {
      anchor = j;
      ++block;
      length = 1;
    }
    blocks.block_of[size_t(j)] = block;
  }
  blocks.n_blocks = block + 1;
  return blocks;
}

double auc_rank_sum(const std::vector<double>& scores,
                    const std::vector<int>& truth) {
  if (scores.size() != truth.size())
    fail(ErrorKind::DimensionMismatch, "scores and truth lengths differ");
  const size_t n = scores.size();
  size_t n_pos = 0;
  for (int t : truth) n_pos += size_t(t != 0);
  if (n_pos == 0 || n_pos == n)
    fail(ErrorKind::NoPositives, "AUC needs both positive and negative labels");

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t(0));
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // midranks over tie groups, then the Mann-Whitney statistic
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double midrank = 0.5 * double(i + 1 + j);  // average of i+1 .. j
    for (size_t r = i; r < j; ++r)
      if (truth[idx[r]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  const double n_neg = double(n - n_pos);
  return (rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1)) /
         (double(n_pos) * n_neg);
}

EvalMetrics evaluate(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& rejections,
    const SparseEffects& truth, const LdBlocks& blocks, const Matrix& scores) {
  const Eigen::Index p = truth.n_snps();
  const Eigen::Index k = truth.n_traits();
  if (scores.rows() != p || scores.cols() != k)
    fail(ErrorKind::DimensionMismatch, "score matrix does not match truth");
  if (Eigen::Index(blocks.block_of.size()) != p)
    fail(ErrorKind::DimensionMismatch, "block assignment does not match truth");

  Eigen::Index n_true = 0, n_hit = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index t = 0; t < k; ++t) n_true += truth.gamma(j, t);
  std::set<std::pair<Eigen::Index, Eigen::Index>> rejected_groups;
  for (const auto& [j, t] : rejections) {
    n_hit += truth.gamma(j, t);
    rejected_groups.emplace(blocks.block_of[size_t(j)], t);
  }

  // per (block, trait): does the block carry any causal SNP for the trait?
  std::set<std::pair<Eigen::Index, Eigen::Index>> causal_groups;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index t = 0; t < k; ++t)
      if (truth.gamma(j, t)) causal_groups.emplace(blocks.block_of[size_t(j)], t);

  Eigen::Index n_false_groups = 0;
  for (const auto& g : rejected_groups)
    if (!causal_groups.count(g)) ++n_false_groups;

  EvalMetrics m;
  m.power = n_true > 0 ? double(n_hit) / double(n_true) : 0.0;
  m.empirical_fdr = rejected_groups.empty()
                        ? 0.0
                        : double(n_false_groups) / double(rejected_groups.size());

  std::vector<double> flat_scores;
  std::vector<int> flat_truth;
  flat_scores.reserve(size_t(p) * size_t(k));
  flat_truth.reserve(size_t(p) * size_t(k));
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index t = 0; t < k; ++t) {
      flat_scores.push_back(scores(j, t));
      flat_truth.push_back(truth.gamma(j, t));
    }
  m.auc = auc_rank_sum(flat_scores, flat_truth);
  return m;
}

EvalMetrics evaluate_h0b(const std::vector<Eigen::Index>& rejected_snps,
                         const SparseEffects& truth, const LdBlocks& blocks,
                         const Vector& scores) {
  const Eigen::Index p = truth.n_snps();
  if (scores.size() != p)
    fail(ErrorKind::DimensionMismatch, "score vector does not match truth");
  if (Eigen::Index(blocks.block_of.size()) != p)
    fail(ErrorKind::DimensionMismatch, "block assignment does not match truth");

  std::vector<int> snp_causal(size_t(p), 0);
  for (Eigen::Index j = 0; j < p; ++j)
    snp_causal[size_t(j)] = int((truth.gamma.row(j).array() != 0).any());

  Eigen::Index n_true = 0, n_hit = 0;
  for (Eigen::Index j = 0; j < p; ++j) n_true += snp_causal[size_t(j)];
  std::set<Eigen::Index> rejected_blocks, causal_blocks;
  for (Eigen::Index j : rejected_snps) {
    n_hit += snp_causal[size_t(j)];
    rejected_blocks.insert(blocks.block_of[size_t(j)]);
  }
  for (Eigen::Index j = 0; j < p; ++j)
    if (snp_causal[size_t(j)]) causal_blocks.insert(blocks.block_of[size_t(j)]);

  Eigen::Index n_false_blocks = 0;
  for (Eigen::Index b : rejected_blocks)
    if (!causal_blocks.count(b)) ++n_false_blocks;

  EvalMetrics m;
  m.power = n_true > 0 ? double(n_hit) / double(n_true) : 0.0;
  m.empirical_fdr = rejected_blocks.empty()
                        ? 0.0
                        : double(n_false_blocks) / double(rejected_blocks.size());

  std::vector<double> flat_scores(scores.data(), scores.data() + p);
  m.auc = auc_rank_sum(flat_scores, snp_causal);
  return m;
}

}  // namespace vimco

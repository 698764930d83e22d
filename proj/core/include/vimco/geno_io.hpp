#ifndef VIMCO_GENO_IO_HPP
#define VIMCO_GENO_IO_HPP

#include <string>
#include <vector>

#include "vimco/types.hpp"

namespace vimco {

/// Raw dosage matrix, N x p, entries 0/1/2 or -1 for missing.
using RawMatrix = Eigen::Matrix<int8_t, Eigen::Dynamic, Eigen::Dynamic>;
constexpr int8_t kMissing = -1;

struct SnpMeta {
  std::string id;
  std::string chromosome;
  long position = 0;
  std::string allele1;  // dosage counts copies of this allele
  std::string allele2;
};

/// Handle to a .bed/.bim/.fam triple. Opening validates the .bed header
/// (magic 0x6C 0x1B, SNP-major mode byte 0x01) and that the file length
/// matches 3 + ceil(N/4) * p.
struct PlinkDataset {
  std::string bed_path;
  std::string bim_path;
  std::string fam_path;
  Eigen::Index n_samples = 0;
  Eigen::Index n_snps = 0;
  std::vector<SnpMeta> snp_meta;
  std::vector<std::string> sample_ids;
};

/// Parses prefix.bim / prefix.fam and validates prefix.bed.
PlinkDataset open_plink(const std::string& prefix);

/// Decodes the SNP-major .bed payload. Two-bit codes, most significant
/// pair first within each byte: 00 -> 2approx copies of allele1, 01 ->
/// missing, 10 -> 1, 11 -> 0. Trailing pad bits of each SNP's last byte
/// are ignored.
RawMatrix read_plink(const PlinkDataset& dataset);

/// Writes the triple; inverse of read_plink (round-trip exact, missing
/// included). snp_meta/sample_ids may be shorter than the matrix only if
/// empty, in which case names are invented.
void write_plink(const std::string& prefix, const RawMatrix& raw,
                 const std::vector<SnpMeta>& snp_meta,
                 const std::vector<std::string>& sample_ids);

struct QcConfig {
  double min_maf = 0.01;
  double max_missing_rate = 0.01;
  double prune_r2 = 0.5;
  int prune_window = 100;
};

struct QcReport {
  Eigen::Index dropped_maf = 0;
  Eigen::Index dropped_missing = 0;
  Eigen::Index kept = 0;
};

struct QcResult {
  RawMatrix filtered;
  std::vector<Eigen::Index> kept_indices;
  QcReport report;
};

/// Drops SNPs with minor allele frequency below min_maf (zero-variance
/// columns count as MAF failures) or missing rate above max_missing_rate.
QcResult qc_filter(const RawMatrix& raw, const QcConfig& qc);

/// Greedy sliding-window prune: scanning left to right, whenever a SNP is
/// within `window` positions of an already-kept SNP and their squared
/// correlation (computed on mean-imputed dosages) exceeds r2, the member of
/// the pair with the higher missing rate is dropped (ties drop the higher
/// index). Returns kept indices into the input.
std::vector<Eigen::Index> ld_prune(const RawMatrix& raw, double r2,
                                   int window);

/// Mean-imputes missing dosages per SNP, centers, and wraps the result.
GenotypeMatrix assemble_genotypes(const RawMatrix& raw,
                                  std::vector<std::string> snp_ids);

/// Reads `sample_id<TAB>trait...` rows, realigns them to the given sample
/// order, centers the columns. Every expected sample must appear exactly
/// once and no others.
PhenotypeMatrix load_pheno_tsv(const std::string& path,
                               const std::vector<std::string>& sample_order);

// -- simulator/interchange TSV formats ------------------------------------

/// SNP-major dosage table: header `snp_id<TAB>sample...`, one row per SNP,
/// missing written as NA.
void write_geno_tsv(const std::string& path, const RawMatrix& raw,
                    const std::vector<std::string>& snp_ids,
                    const std::vector<std::string>& sample_ids);

struct GenoTable {
  RawMatrix raw;
  std::vector<std::string> snp_ids;
  std::vector<std::string> sample_ids;
};

GenoTable read_geno_tsv(const std::string& path);

void write_pheno_tsv(const std::string& path, const Matrix& values,
                     const std::vector<std::string>& trait_ids,
                     const std::vector<std::string>& sample_ids);

/// Nonzero true effects as `snp_id<TAB>trait_id<TAB>beta` rows.
void write_truth_tsv(const std::string& path, const SparseEffects& truth,
                     const std::vector<std::string>& snp_ids,
                     const std::vector<std::string>& trait_ids);

/// Per-(SNP, trait) association calls:
/// `snp_id<TAB>trait_id<TAB>alpha<TAB>lfdr<TAB>rejected`.
void write_association_tsv(const std::string& path,
                           const AssociationReport& report,
                           const Matrix& alpha,
                           const std::vector<std::string>& snp_ids,
                           const std::vector<std::string>& trait_ids);

}  // namespace vimco

#endif

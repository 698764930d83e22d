#ifndef VIMCO_CHECKPOINT_HPP
#define VIMCO_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "vimco/vbem.hpp"

namespace vimco {

/// A saved fit: everything needed to resume EM or run association calls.
/// Residuals are not stored — they are recomputed from (mu, alpha, X, Y)
/// on warm start, which also revalidates the cache.
struct Checkpoint {
  int schema_version = 1;
  FitMode mode = FitMode::kFull;
  uint64_t dataset_hash = 0;  // fingerprint of the (X, Y) pair fitted
  FitResult result;
};

/// Order-sensitive FNV-1a over the dataset's dimensions and phenotype
/// bytes; cheap guard against resuming on the wrong data.
uint64_t dataset_fingerprint(const GenotypeMatrix& geno,
                             const PhenotypeMatrix& pheno);

void save_checkpoint(const std::string& path, const FitResult& result,
                     FitMode mode, uint64_t dataset_hash);

/// Parses and validates a checkpoint. Errors: IoFailure, MetaMismatch
/// (wrong schema version or malformed content).
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vimco

#endif

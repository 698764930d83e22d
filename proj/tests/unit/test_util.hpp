#ifndef VIMCO_TEST_UTIL_HPP
#define VIMCO_TEST_UTIL_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vimco/types.hpp"

namespace testutil {

/// Fresh per-tag scratch directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
  const auto d = std::filesystem::temp_directory_path() / ("vimco_" + tag);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

inline std::vector<std::string> numbered(const std::string& stem, int n) {
  std::vector<std::string> out;
  out.reserve(size_t(n));
  for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

inline vimco::Matrix gaussian_matrix(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  vimco::Matrix m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = gauss(rng);
  return m;
}

inline vimco::GenotypeMatrix random_geno(int n, int p, std::mt19937_64& rng) {
  return vimco::GenotypeMatrix(vimco::center_columns(gaussian_matrix(n, p, rng)),
                               numbered("snp", p));
}

inline vimco::PhenotypeMatrix random_pheno(int n, int k, std::mt19937_64& rng) {
  return vimco::PhenotypeMatrix(
      vimco::center_columns(gaussian_matrix(n, k, rng)), numbered("trait", k));
}

/// Gram-Schmidt on centered gaussian columns; columns stay centered.
inline vimco::GenotypeMatrix orthogonal_geno(int n, int p,
                                             std::mt19937_64& rng) {
  vimco::Matrix x = vimco::center_columns(gaussian_matrix(n, p, rng));
  for (int j = 0; j < p; ++j)
    for (int t = 0; t < j; ++t)
      x.col(j) -= x.col(t).dot(x.col(j)) / x.col(t).squaredNorm() * x.col(t);
  return vimco::GenotypeMatrix(std::move(x), numbered("snp", p));
}

}  // namespace testutil

#endif

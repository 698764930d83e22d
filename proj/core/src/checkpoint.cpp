#include "vimco/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace vimco {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array())
    fail(ErrorKind::MetaMismatch, std::string("checkpoint: ") + what +
                                      " is not an array");
  const Eigen::Index r = Eigen::Index(rows.size());
  Matrix m(r, r > 0 ? Eigen::Index(rows[0].size()) : 0);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[size_t(i)];
    if (Eigen::Index(row.size()) != m.cols())
      fail(ErrorKind::MetaMismatch,
           std::string("checkpoint: ragged rows in ") + what);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = row[size_t(j)].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& arr, const char* what) {
  if (!arr.is_array())
    fail(ErrorKind::MetaMismatch, std::string("checkpoint: ") + what +
                                      " is not an array");
  Vector v(Eigen::Index(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = arr[size_t(i)].get<double>();
  return v;
}

void hash_bytes(uint64_t& h, const void* data, size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

uint64_t dataset_fingerprint(const GenotypeMatrix& geno,
                             const PhenotypeMatrix& pheno) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const int64_t dims[3] = {geno.n_samples(), geno.n_snps(), pheno.n_traits()};
  hash_bytes(h, dims, sizeof dims);
  hash_bytes(h, pheno.data().data(),
             size_t(pheno.data().size()) * sizeof(double));
  return h;
}

void save_checkpoint(const std::string& path, const FitResult& result,
                     FitMode mode, uint64_t dataset_hash) {
  json doc;
  doc["kind"] = "vimco_checkpoint";
  doc["schema_version"] = 1;
  doc["mode"] = mode == FitMode::kFull ? "full" : "diagonal_precision";
  doc["dataset_hash"] = dataset_hash;
  doc["converged"] = result.converged;
  doc["n_iters"] = result.n_iters;
  doc["elbo_trace"] = result.elbo_trace;
  doc["params"] = {
      {"inclusion_probs",
       std::vector<double>(result.params.inclusion_probs.begin(),
                           result.params.inclusion_probs.end())},
      {"slab_vars", std::vector<double>(result.params.slab_vars.begin(),
                                        result.params.slab_vars.end())},
      {"precision", matrix_to_json(result.params.precision)},
  };
  doc["state"] = {
      {"mu", matrix_to_json(result.state.mu)},
      {"s2", matrix_to_json(result.state.s2)},
      {"alpha", matrix_to_json(result.state.alpha)},
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
  out << doc.dump();
  out << '\n';
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::MetaMismatch, path + ": not a valid checkpoint: " + e.what());
  }
  if (doc.value("kind", "") != "vimco_checkpoint")
    fail(ErrorKind::MetaMismatch, path + ": not a checkpoint file");
  if (doc.value("schema_version", -1) != 1)
    fail(ErrorKind::MetaMismatch, path + ": unsupported checkpoint version");

  Checkpoint c;
  try {
    const std::string mode = doc.value("mode", "full");
    c.mode = mode == "diagonal_precision" ? FitMode::kDiagonalPrecision
                                          : FitMode::kFull;
    c.dataset_hash = doc.value("dataset_hash", uint64_t(0));
    c.result.converged = doc.value("converged", false);
    c.result.n_iters = doc.value("n_iters", 0);
    c.result.elbo_trace = doc.value("elbo_trace", std::vector<double>{});

    const auto& p = doc.at("params");
    c.result.params = ModelParams(
        vector_from_json(p.at("inclusion_probs"), "inclusion_probs"),
        vector_from_json(p.at("slab_vars"), "slab_vars"),
        matrix_from_json(p.at("precision"), "precision"));

    const auto& s = doc.at("state");
    c.result.state.mu = matrix_from_json(s.at("mu"), "mu");
    c.result.state.s2 = matrix_from_json(s.at("s2"), "s2");
    c.result.state.alpha = matrix_from_json(s.at("alpha"), "alpha");
  } catch (const json::exception& e) {
    fail(ErrorKind::MetaMismatch, path + ": malformed checkpoint: " + e.what());
  }
  if (c.result.state.s2.rows() != c.result.state.mu.rows() ||
      c.result.state.alpha.rows() != c.result.state.mu.rows() ||
      c.result.state.s2.cols() != c.result.state.mu.cols() ||
      c.result.state.alpha.cols() != c.result.state.mu.cols())
    fail(ErrorKind::MetaMismatch, path + ": state blocks disagree on shape");
  // residuals intentionally absent; warm starts recompute them
  c.result.state.residuals.resize(0, 0);
  return c;
}

}  // namespace vimco

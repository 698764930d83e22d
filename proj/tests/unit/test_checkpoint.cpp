#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <string>

#include "test_util.hpp"
#include "vimco/checkpoint.hpp"
#include "vimco/errors.hpp"
#include "vimco/vbem.hpp"

using Catch::Approx;
using namespace vimco;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("checkpoint survives a save/load round trip") {
  std::mt19937_64 rng(70);
  GenotypeMatrix x = testutil::random_geno(40, 12, rng);
  PhenotypeMatrix y = testutil::random_pheno(40, 2, rng);
  FitConfig cfg;
  cfg.max_iters = 5;
  FitResult fit1 = fit(x, y, cfg);

  const auto dir = testutil::temp_dir("ckpt_roundtrip");
  const auto path = (dir / "fit.json").string();
  const uint64_t hash = dataset_fingerprint(x, y);
  save_checkpoint(path, fit1, FitMode::kFull, hash);

  Checkpoint c = load_checkpoint(path);
  CHECK(c.schema_version == 1);
  CHECK(c.mode == FitMode::kFull);
  CHECK(c.dataset_hash == hash);
  CHECK(c.result.converged == fit1.converged);
  CHECK(c.result.n_iters == fit1.n_iters);
  REQUIRE(c.result.elbo_trace.size() == fit1.elbo_trace.size());
  for (size_t i = 0; i < fit1.elbo_trace.size(); ++i)
    CHECK(c.result.elbo_trace[i] == fit1.elbo_trace[i]);
  CHECK((c.result.state.mu - fit1.state.mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.result.state.s2 - fit1.state.s2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.result.state.alpha - fit1.state.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.result.params.precision - fit1.params.precision)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((c.result.params.inclusion_probs - fit1.params.inclusion_probs)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((c.result.params.slab_vars - fit1.params.slab_vars)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  // residuals are never stored; warm starts rebuild them
  CHECK(c.result.state.residuals.size() == 0);

  SECTION("diagonal mode string round-trips") {
    save_checkpoint(path, fit1, FitMode::kDiagonalPrecision, hash);
    CHECK(load_checkpoint(path).mode == FitMode::kDiagonalPrecision);
  }
}

TEST_CASE("resuming from a checkpoint continues the elbo climb") {
  std::mt19937_64 rng(71);
  GenotypeMatrix x = testutil::random_geno(60, 20, rng);
  PhenotypeMatrix y = testutil::random_pheno(60, 3, rng);

  FitConfig first;
  first.max_iters = 3;
  FitResult partial = fit(x, y, first);
  REQUIRE_FALSE(partial.converged);

  const auto dir = testutil::temp_dir("ckpt_resume");
  const auto path = (dir / "partial.json").string();
  save_checkpoint(path, partial, FitMode::kFull, dataset_fingerprint(x, y));

  Checkpoint c = load_checkpoint(path);
  FitConfig resumed;
  resumed.warm_start = WarmStart{c.result.state, c.result.params};
  FitResult rest = fit(x, y, resumed);
  REQUIRE_FALSE(rest.elbo_trace.empty());
  CHECK(rest.elbo_trace.front() >= partial.elbo_trace.back() - 1e-8);
  CHECK(rest.elbo_trace.back() >= partial.elbo_trace.back());

  // the stitched run should land where an uninterrupted one does
  FitConfig straight;
  FitResult whole = fit(x, y, straight);
  CHECK(rest.elbo_trace.back() ==
        Approx(whole.elbo_trace.back()).margin(1e-6));
}

TEST_CASE("checkpoint validation rejects foreign or damaged files") {
  std::mt19937_64 rng(72);
  GenotypeMatrix x = testutil::random_geno(20, 5, rng);
  PhenotypeMatrix y = testutil::random_pheno(20, 2, rng);
  FitConfig cfg;
  cfg.max_iters = 2;
  FitResult r = fit(x, y, cfg);

  const auto dir = testutil::temp_dir("ckpt_bad");
  const auto path = (dir / "ck.json").string();
  save_checkpoint(path, r, FitMode::kFull, 1);
  const std::string good = read_text(path);

  auto expect_meta_mismatch = [&](const std::string& text) {
    write_text(path, text);
    CHECK_THROWS_MATCHES(load_checkpoint(path), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::MetaMismatch;
                         }));
  };

  SECTION("not json") { expect_meta_mismatch("definitely not json"); }
  SECTION("wrong kind") {
    std::string t = good;
    const auto pos = t.find("vimco_checkpoint");
    REQUIRE(pos != std::string::npos);
    t.replace(pos, 16, "vimco_somethingg");
    expect_meta_mismatch(t);
  }
  SECTION("unsupported version") {
    std::string t = good;
    const auto pos = t.find("\"schema_version\":1");
    REQUIRE(pos != std::string::npos);
    t.replace(pos, 18, "\"schema_version\":2");
    expect_meta_mismatch(t);
  }
  SECTION("missing state block") {
    std::string t = good;
    const auto pos = t.find("\"state\"");
    REQUIRE(pos != std::string::npos);
    t.replace(pos, 7, "\"stale\"");
    expect_meta_mismatch(t);
  }
  SECTION("missing file") {
    CHECK_THROWS_MATCHES((void)load_checkpoint((dir / "nope.json").string()),
                         Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::IoFailure;
                         }));
  }
}

TEST_CASE("dataset fingerprint reacts to shape and phenotype changes") {
  std::mt19937_64 rng(73);
  GenotypeMatrix x = testutil::random_geno(30, 8, rng);
  PhenotypeMatrix y = testutil::random_pheno(30, 2, rng);
  const uint64_t base = dataset_fingerprint(x, y);
  CHECK(base == dataset_fingerprint(x, y));  // deterministic

  Matrix y2 = y.data();
  y2(4, 1) += 1e-9;
  CHECK(dataset_fingerprint(x, PhenotypeMatrix(center_columns(y2),
                                               y.trait_ids())) != base);

  GenotypeMatrix narrower = testutil::random_geno(30, 7, rng);
  CHECK(dataset_fingerprint(narrower, y) != base);
}

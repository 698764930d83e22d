#include <benchmark/benchmark.h>

#include "vimco/oracle.hpp"
#include "vimco/simgen.hpp"
#include "vimco/study.hpp"
#include "vimco/vbem.hpp"

using namespace vimco;

namespace {

SimDataset make_data(Eigen::Index n, Eigen::Index p, Eigen::Index k) {
  SimConfig cfg;
  cfg.n_samples = n;
  cfg.n_snps = p;
  cfg.n_traits = k;
  cfg.rho_x = 0.5;
  cfg.rho_e = 0.5;
  cfg.causal_frac = 0.01;
  cfg.seed = 42;
  return simulate(cfg);
}

}  // namespace

static void BM_EStepSweep(benchmark::State& state) {
  SimDataset d = make_data(500, state.range(0), state.range(1));
  WarmStart w = null_init(d.geno, d.pheno);
  for (auto _ : state) {
    e_step_sweep(w.state, w.params, d.geno, d.pheno);
    benchmark::DoNotOptimize(w.state.mu.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_EStepSweep)
    ->Args({250, 1})
    ->Args({250, 4})
    ->Args({1000, 1})
    ->Args({1000, 4})
    ->Unit(benchmark::kMillisecond);

static void BM_MStep(benchmark::State& state) {
  const bool diagonal = state.range(0) != 0;
  SimDataset d = make_data(500, 1000, 4);
  WarmStart w = null_init(d.geno, d.pheno);
  e_step_sweep(w.state, w.params, d.geno, d.pheno);
  for (auto _ : state) {
    m_step(w.state, w.params, d.geno, d.pheno,
           diagonal ? FitMode::kDiagonalPrecision : FitMode::kFull);
    benchmark::DoNotOptimize(w.params.precision.data());
  }
}
BENCHMARK(BM_MStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Elbo(benchmark::State& state) {
  SimDataset d = make_data(500, 1000, 4);
  WarmStart w = null_init(d.geno, d.pheno);
  for (auto _ : state) {
    benchmark::DoNotOptimize(elbo(w.state, w.params, d.geno, d.pheno));
  }
}
BENCHMARK(BM_Elbo)->Unit(benchmark::kMillisecond);

static void BM_TwoPhaseFit(benchmark::State& state) {
  SimDataset d = make_data(300, state.range(0), 4);
  for (auto _ : state) {
    TwoPhaseResult r = fit_two_phase(d.geno, d.pheno);
    benchmark::DoNotOptimize(r.full.elbo_trace.back());
  }
}
BENCHMARK(BM_TwoPhaseFit)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_ExactPosterior(benchmark::State& state) {
  SimDataset d = make_data(16, state.range(0), 2);
  const ModelParams params = null_init(d.geno, d.pheno).params;
  for (auto _ : state) {
    ExactPosterior ep = exact_posterior(d.geno, d.pheno, params);
    benchmark::DoNotOptimize(ep.log_marginal);
  }
}
BENCHMARK(BM_ExactPosterior)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_SimulateGenotypes(benchmark::State& state) {
  for (auto _ : state) {
    std::mt19937_64 rng(7);
    GeneratedGenotypes g =
        gen_genotypes(500, state.range(0), 0.8, {0.05, 0.5}, rng);
    benchmark::DoNotOptimize(g.centered.data().data());
  }
}
BENCHMARK(BM_SimulateGenotypes)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// vimco command-line driver: simulate / fit / assoc / bench.
//
// Every run writes a manifest.json echoing the full configuration (seed
// included), so any output can be reproduced bit-for-bit by replaying the
// manifest. Exit codes: 0 ok, 1 usage, 2 data, 3 numerical failure.

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vimco/checkpoint.hpp"
#include "vimco/errors.hpp"
#include "vimco/geno_io.hpp"
#include "vimco/inference.hpp"
#include "vimco/simgen.hpp"
#include "vimco/study.hpp"
#include "vimco/vbem.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vimco;

namespace {

constexpr int kManifestVersion = 1;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    fail(ErrorKind::MetaMismatch, path + " is not valid JSON");
  return doc;
}

json manifest_base(const std::string& command) {
  json m;
  m["kind"] = "vimco_manifest";
  m["schema_version"] = kManifestVersion;
  m["command"] = command;
  return m;
}

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// dataset loading shared by fit and assoc

struct DataOpts {
  std::string geno_path;
  std::string pheno_path;
  bool qc = false;
  QcConfig qcfg;
};

struct Dataset {
  GenotypeMatrix geno;
  PhenotypeMatrix pheno;
  uint64_t hash = 0;
};

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

Dataset load_dataset(const DataOpts& o) {
  RawMatrix raw;
  std::vector<std::string> snp_ids, sample_ids;
  if (ends_with(o.geno_path, ".bed")) {
    PlinkDataset d = open_plink(o.geno_path.substr(0, o.geno_path.size() - 4));
    raw = read_plink(d);
    snp_ids.reserve(d.snp_meta.size());
    for (const auto& m : d.snp_meta) snp_ids.push_back(m.id);
    sample_ids = d.sample_ids;
  } else {
    GenoTable t = read_geno_tsv(o.geno_path);
    raw = std::move(t.raw);
    snp_ids = std::move(t.snp_ids);
    sample_ids = std::move(t.sample_ids);
  }
  if (o.qc) {
    QcResult qr = qc_filter(raw, o.qcfg);
    std::vector<std::string> kept_ids;
    kept_ids.reserve(qr.kept_indices.size());
    for (Eigen::Index j : qr.kept_indices) kept_ids.push_back(snp_ids[size_t(j)]);
    std::vector<Eigen::Index> pruned =
        ld_prune(qr.filtered, o.qcfg.prune_r2, o.qcfg.prune_window);
    RawMatrix final_raw(raw.rows(), Eigen::Index(pruned.size()));
    std::vector<std::string> final_ids;
    final_ids.reserve(pruned.size());
    for (size_t i = 0; i < pruned.size(); ++i) {
      final_raw.col(Eigen::Index(i)) = qr.filtered.col(pruned[i]);
      final_ids.push_back(kept_ids[size_t(pruned[i])]);
    }
    std::printf("qc: %lld snps in, %lld after maf/missing, %zu after prune\n",
                (long long)raw.cols(), (long long)qr.report.kept, pruned.size());
    raw = std::move(final_raw);
    snp_ids = std::move(final_ids);
  }
  GenotypeMatrix geno = assemble_genotypes(raw, std::move(snp_ids));
  PhenotypeMatrix pheno = load_pheno_tsv(o.pheno_path, sample_ids);
  const uint64_t hash = dataset_fingerprint(geno, pheno);
  return Dataset{std::move(geno), std::move(pheno), hash};
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  SimConfig cfg;
  std::string out = ".";
  std::string format = "tsv";  // tsv | bed
  std::string from_manifest;
};

void sim_config_to_json(const SimConfig& c, const std::string& format, json& j) {
  j["n_samples"] = c.n_samples;
  j["n_snps"] = c.n_snps;
  j["n_traits"] = c.n_traits;
  j["rho_x"] = c.rho_x;
  j["rho_e"] = c.rho_e;
  j["causal_frac"] = c.causal_frac;
  j["pleiotropy_g"] = c.pleiotropy_g;
  j["h2"] = c.h2;
  j["maf_min"] = c.maf_range.first;
  j["maf_max"] = c.maf_range.second;
  j["seed"] = c.seed;
  j["format"] = format;
}

void sim_config_from_json(const json& j, SimConfig& c, std::string& format) {
  c.n_samples = j.at("n_samples").get<Eigen::Index>();
  c.n_snps = j.at("n_snps").get<Eigen::Index>();
  c.n_traits = j.at("n_traits").get<Eigen::Index>();
  c.rho_x = j.at("rho_x").get<double>();
  c.rho_e = j.at("rho_e").get<double>();
  c.causal_frac = j.at("causal_frac").get<double>();
  c.pleiotropy_g = j.at("pleiotropy_g").get<double>();
  c.h2 = j.at("h2").get<double>();
  c.maf_range = {j.at("maf_min").get<double>(), j.at("maf_max").get<double>()};
  c.seed = j.at("seed").get<uint64_t>();
  format = j.at("format").get<std::string>();
}

int cmd_simulate(SimulateOpts o) {
  if (!o.from_manifest.empty()) {
    json doc = read_json_file(o.from_manifest);
    if (doc.value("kind", "") != "vimco_manifest" ||
        doc.value("command", "") != "simulate")
      fail(ErrorKind::MetaMismatch,
           o.from_manifest + " is not a simulate manifest");
    sim_config_from_json(doc.at("config"), o.cfg, o.format);
  }
  fs::create_directories(o.out);

  SimDataset data = simulate(o.cfg);
  std::vector<std::string> sample_ids;
  sample_ids.reserve(size_t(o.cfg.n_samples));
  for (Eigen::Index i = 0; i < o.cfg.n_samples; ++i)
    sample_ids.push_back("sample" + std::to_string(i + 1));
  const auto& snp_ids = data.geno.snp_ids();
  const auto& trait_ids = data.pheno.trait_ids();

  if (o.format == "bed") {
    std::vector<SnpMeta> meta;
    meta.reserve(snp_ids.size());
    for (size_t j = 0; j < snp_ids.size(); ++j)
      meta.push_back(SnpMeta{snp_ids[j], "1", long(j + 1), "A", "B"});
    write_plink(join_path(o.out, "geno"), data.raw, meta, sample_ids);
  } else if (o.format == "tsv") {
    write_geno_tsv(join_path(o.out, "geno.tsv"), data.raw, snp_ids, sample_ids);
  } else {
    fail(ErrorKind::InvalidConfig, "format must be tsv or bed");
  }
  write_pheno_tsv(join_path(o.out, "pheno.tsv"), data.pheno.data(), trait_ids,
                  sample_ids);
  write_truth_tsv(join_path(o.out, "truth.tsv"), data.truth, snp_ids,
                  trait_ids);

  json m = manifest_base("simulate");
  sim_config_to_json(o.cfg, o.format, m["config"]);
  m["stats"]["realized_g"] = data.realized_g;
  write_json_file(join_path(o.out, "manifest.json"), m);

  std::printf("simulated %lld samples x %lld snps x %lld traits (realized g %.4f) -> %s\n",
              (long long)o.cfg.n_samples, (long long)o.cfg.n_snps,
              (long long)o.cfg.n_traits, data.realized_g, o.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
  DataOpts data;
  std::string out = ".";
  std::string mode = "vimco";  // vimco | bvsr
  bool single_phase = false;
  std::string resume;
  int max_iters = 600;
  double tol = 1e-6;
  uint64_t seed = 0;
  bool shuffle = false;
};

void append_trace(std::string& csv, const char* phase, const std::vector<double>& trace) {
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.17g\n", phase, i + 1, trace[i]);
    csv += buf;
  }
}

json params_to_json(const ModelParams& p) {
  json j;
  j["inclusion_probs"] = std::vector<double>(
      p.inclusion_probs.data(), p.inclusion_probs.data() + p.inclusion_probs.size());
  j["slab_vars"] = std::vector<double>(
      p.slab_vars.data(), p.slab_vars.data() + p.slab_vars.size());
  json rows = json::array();
  for (Eigen::Index s = 0; s < p.precision.rows(); ++s) {
    json row = json::array();
    for (Eigen::Index t = 0; t < p.precision.cols(); ++t)
      row.push_back(p.precision(s, t));
    rows.push_back(std::move(row));
  }
  j["precision"] = std::move(rows);
  return j;
}

int cmd_fit(const FitOpts& o) {
  if (o.mode != "vimco" && o.mode != "bvsr")
    fail(ErrorKind::InvalidConfig, "mode must be vimco or bvsr");
  Dataset d = load_dataset(o.data);
  fs::create_directories(o.out);

  FitConfig base;
  base.max_iters = o.max_iters;
  base.elbo_rel_tol = o.tol;
  base.seed = o.seed;
  base.shuffle_coordinates = o.shuffle;

  std::string trace_csv = "phase,iter,elbo\n";
  FitResult final_fit;
  FitMode final_mode =
      o.mode == "bvsr" ? FitMode::kDiagonalPrecision : FitMode::kFull;

  if (!o.resume.empty()) {
    Checkpoint ckpt = load_checkpoint(o.resume);
    if (ckpt.dataset_hash != d.hash)
      fail(ErrorKind::MetaMismatch,
           "checkpoint " + o.resume + " was fitted on different data");
    FitConfig cfg = base;
    cfg.mode = final_mode;
    cfg.warm_start = WarmStart{ckpt.result.state, ckpt.result.params};
    final_fit = fit(d.geno, d.pheno, cfg);
    append_trace(trace_csv, o.mode == "bvsr" ? "diagonal" : "full",
                 final_fit.elbo_trace);
  } else if (o.mode == "bvsr") {
    FitConfig cfg = base;
    cfg.mode = FitMode::kDiagonalPrecision;
    final_fit = fit(d.geno, d.pheno, cfg);
    append_trace(trace_csv, "diagonal", final_fit.elbo_trace);
  } else if (o.single_phase) {
    FitConfig cfg = base;
    cfg.mode = FitMode::kFull;
    final_fit = fit(d.geno, d.pheno, cfg);
    append_trace(trace_csv, "full", final_fit.elbo_trace);
  } else {
    TwoPhaseResult two = fit_two_phase(d.geno, d.pheno, base);
    append_trace(trace_csv, "diagonal", two.diagonal.elbo_trace);
    append_trace(trace_csv, "full", two.full.elbo_trace);
    final_fit = std::move(two.full);
  }

  save_checkpoint(join_path(o.out, "checkpoint.json"), final_fit, final_mode,
                  d.hash);
  {
    std::ofstream tf(join_path(o.out, "elbo_trace.csv"));
    if (!tf) fail(ErrorKind::IoFailure, "cannot write elbo_trace.csv");
    tf << trace_csv;
  }
  json pj = params_to_json(final_fit.params);
  pj["converged"] = final_fit.converged;
  pj["n_iters"] = final_fit.n_iters;
  write_json_file(join_path(o.out, "params.json"), pj);

  json m = manifest_base("fit");
  m["config"] = {{"geno", o.data.geno_path}, {"pheno", o.data.pheno_path},
                 {"qc", o.data.qc},          {"mode", o.mode},
                 {"single_phase", o.single_phase}, {"resume", o.resume},
                 {"max_iters", o.max_iters}, {"tol", o.tol},
                 {"seed", o.seed},           {"shuffle", o.shuffle}};
  m["inputs"]["dataset_hash"] = hash_hex(d.hash);
  write_json_file(join_path(o.out, "manifest.json"), m);

  std::printf("fit (%s): %s after %d iterations, final elbo %.10g -> %s\n",
              o.mode.c_str(), final_fit.converged ? "converged" : "iteration cap",
              final_fit.n_iters, final_fit.elbo_trace.back(), o.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// assoc

struct AssocOpts {
  DataOpts data;
  std::string checkpoint;
  std::string out = ".";
  double fdr = 0.1;
};

int cmd_assoc(const AssocOpts& o) {
  Dataset d = load_dataset(o.data);
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  if (ckpt.dataset_hash != d.hash)
    fail(ErrorKind::MetaMismatch,
         "checkpoint " + o.checkpoint + " was fitted on different data");
  if (ckpt.result.state.n_snps() != d.geno.n_snps() ||
      ckpt.result.state.n_traits() != d.pheno.n_traits())
    fail(ErrorKind::DimensionMismatch, "checkpoint shape does not match data");
  fs::create_directories(o.out);

  const Matrix& alpha = ckpt.result.state.alpha;
  AssociationReport report = select_associations(alpha, o.fdr);
  write_association_tsv(join_path(o.out, "associations.tsv"), report, alpha,
                        d.geno.snp_ids(), d.pheno.trait_ids());

  std::vector<long long> per_trait(size_t(d.pheno.n_traits()), 0);
  for (const auto& [j, k] : report.rejections) ++per_trait[size_t(k)];
  json s;
  s["target_fdr"] = report.target_fdr;
  s["xi"] = report.threshold_xi;
  s["n_rejections"] = report.rejections.size();
  for (Eigen::Index k = 0; k < d.pheno.n_traits(); ++k)
    s["per_trait"][d.pheno.trait_ids()[size_t(k)]] = per_trait[size_t(k)];
  write_json_file(join_path(o.out, "summary.json"), s);

  json m = manifest_base("assoc");
  m["config"] = {{"geno", o.data.geno_path},
                 {"pheno", o.data.pheno_path},
                 {"qc", o.data.qc},
                 {"checkpoint", o.checkpoint},
                 {"fdr", o.fdr}};
  m["inputs"]["dataset_hash"] = hash_hex(d.hash);
  write_json_file(join_path(o.out, "manifest.json"), m);

  std::printf("assoc: %zu rejections at target fdr %g (xi %.6g)\n",
              report.rejections.size(), o.fdr, report.threshold_xi);
  for (Eigen::Index k = 0; k < d.pheno.n_traits(); ++k)
    std::printf("  %s: %lld\n", d.pheno.trait_ids()[size_t(k)].c_str(),
                per_trait[size_t(k)]);
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  StudyConfig study;
  std::vector<double> rho_x{0.8};
  std::vector<double> rho_e{0.2, 0.5, 0.8};
  std::vector<double> g{0.0};
  int replicates = 50;
  int threads = 1;
  std::string out = ".";
};

int cmd_bench(const BenchOpts& o) {
  if (o.replicates < 1)
    fail(ErrorKind::InvalidConfig, "replicates must be at least 1");
  if (o.threads < 1) fail(ErrorKind::InvalidConfig, "threads must be at least 1");
  fs::create_directories(o.out);

  std::vector<StudyCell> cells;
  for (double rx : o.rho_x)
    for (double re : o.rho_e)
      for (double gg : o.g) cells.push_back(StudyCell{rx, re, gg});

  const size_t n_tasks = cells.size() * size_t(o.replicates);
  std::vector<ReplicateResult> results(n_tasks);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t t; (t = next.fetch_add(1)) < n_tasks;) {
      const StudyCell& cell = cells[t / size_t(o.replicates)];
      const int rep = int(t % size_t(o.replicates));
      results[t] = run_replicate(o.study, cell, rep);
    }
  };
  const int n_threads = int(std::min(size_t(o.threads), n_tasks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::string tsv_path = join_path(o.out, "results.tsv");
  std::ofstream tsv(tsv_path);
  if (!tsv) fail(ErrorKind::IoFailure, "cannot write " + tsv_path);
  tsv << "replicate\tmethod\thypothesis\trho_x\trho_e\tg\tpower\tfdr\tauc\n";
  char buf[256];
  for (const ReplicateResult& r : results) {
    for (const StudyRow& row : rows_of(r)) {
      std::snprintf(buf, sizeof buf,
                    "%d\t%s\t%s\t%g\t%g\t%g\t%.6g\t%.6g\t%.6g\n", row.replicate,
                    row.method.c_str(), row.hypothesis.c_str(), row.cell.rho_x,
                    row.cell.rho_e, row.cell.g, row.metrics.power,
                    row.metrics.empirical_fdr, row.metrics.auc);
      tsv << buf;
    }
  }
  if (!tsv) fail(ErrorKind::IoFailure, "short write to " + tsv_path);
  tsv.close();

  json m = manifest_base("bench");
  m["config"] = {{"n_samples", o.study.n_samples},
                 {"n_snps", o.study.n_snps},
                 {"n_traits", o.study.n_traits},
                 {"causal_frac", o.study.causal_frac},
                 {"h2", o.study.h2},
                 {"target_fdr", o.study.target_fdr},
                 {"ld_r2", o.study.ld_r2},
                 {"ld_window", o.study.ld_window},
                 {"max_iters", o.study.max_iters},
                 {"tol", o.study.elbo_rel_tol},
                 {"base_seed", o.study.base_seed},
                 {"rho_x", o.rho_x},
                 {"rho_e", o.rho_e},
                 {"g", o.g},
                 {"replicates", o.replicates}};
  write_json_file(join_path(o.out, "manifest.json"), m);

  // per-cell means for a quick read; the TSV has the full per-replicate rows
  for (const StudyCell& cell : cells) {
    for (const char* method : {"vimco", "bvsr"}) {
      for (const char* hyp : {"h0a", "h0b"}) {
        double pw = 0, fd = 0, au = 0;
        int n = 0;
        for (const ReplicateResult& r : results) {
          if (r.cell.rho_x != cell.rho_x || r.cell.rho_e != cell.rho_e ||
              r.cell.g != cell.g)
            continue;
          for (const StudyRow& row : rows_of(r)) {
            if (row.method != method || row.hypothesis != hyp) continue;
            pw += row.metrics.power;
            fd += row.metrics.empirical_fdr;
            au += row.metrics.auc;
            ++n;
          }
        }
        std::printf(
            "rho_x %.2f rho_e %.2f g %.2f  %-5s %s  power %.3f fdr %.3f auc %.3f\n",
            cell.rho_x, cell.rho_e, cell.g, method, hyp, pw / n, fd / n, au / n);
      }
    }
  }
  std::printf("wrote %zu rows -> %s\n", 4 * n_tasks, tsv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vimco: joint SNP-to-multiple-trait mapping (spike-slab VB EM)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file (sections per subcommand)");

  SimulateOpts sim;
  CLI::App* s = app.add_subcommand("simulate", "generate a synthetic dataset");
  s->add_option("--n", sim.cfg.n_samples, "samples")->capture_default_str();
  s->add_option("--p", sim.cfg.n_snps, "snps")->capture_default_str();
  s->add_option("--k", sim.cfg.n_traits, "traits")->capture_default_str();
  s->add_option("--rho-x", sim.cfg.rho_x, "genotype AR(1) correlation")
      ->check(CLI::Range(0.0, 0.999))->capture_default_str();
  s->add_option("--rho-e", sim.cfg.rho_e, "error AR(1) correlation")
      ->check(CLI::Range(0.0, 0.999))->capture_default_str();
  s->add_option("--causal-frac", sim.cfg.causal_frac, "fraction of causal snps")
      ->capture_default_str();
  s->add_option("--g", sim.cfg.pleiotropy_g, "expected pleiotropy fraction")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  s->add_option("--h2", sim.cfg.h2, "per-trait heritability")
      ->check(CLI::Range(0.001, 0.999))->capture_default_str();
  s->add_option("--maf-min", sim.cfg.maf_range.first, "minor allele freq lower bound")
      ->capture_default_str();
  s->add_option("--maf-max", sim.cfg.maf_range.second, "minor allele freq upper bound")
      ->capture_default_str();
  s->add_option("--seed", sim.cfg.seed, "rng seed")->capture_default_str();
  s->add_option("--format", sim.format, "geno output: tsv or bed")
      ->check(CLI::IsMember({"tsv", "bed"}))->capture_default_str();
  s->add_option("--from-manifest", sim.from_manifest,
                "replay a previous run's manifest.json (parameter flags ignored)");
  s->add_option("--out", sim.out, "output directory")->capture_default_str();

  FitOpts fit_o;
  CLI::App* f = app.add_subcommand("fit", "variational EM fit");
  f->add_option("--geno", fit_o.data.geno_path,
                "genotype tsv, or a .bed path (with .bim/.fam siblings)")
      ->required();
  f->add_option("--pheno", fit_o.data.pheno_path, "phenotype tsv")->required();
  f->add_flag("--qc", fit_o.data.qc, "apply maf/missingness filters and LD pruning");
  f->add_option("--min-maf", fit_o.data.qcfg.min_maf, "qc: minimum maf")->capture_default_str();
  f->add_option("--max-missing", fit_o.data.qcfg.max_missing_rate, "qc: max missing rate")
      ->capture_default_str();
  f->add_option("--prune-r2", fit_o.data.qcfg.prune_r2, "qc: LD prune r^2")->capture_default_str();
  f->add_option("--prune-window", fit_o.data.qcfg.prune_window, "qc: LD prune window")
      ->capture_default_str();
  f->add_option("--mode", fit_o.mode, "vimco (full precision) or bvsr (per-trait)")
      ->check(CLI::IsMember({"vimco", "bvsr"}))->capture_default_str();
  f->add_flag("--single-phase", fit_o.single_phase,
              "skip the diagonal warm-start phase");
  f->add_option("--resume", fit_o.resume, "continue from a checkpoint.json");
  f->add_option("--max-iters", fit_o.max_iters, "iteration cap per phase")
      ->check(CLI::PositiveNumber)->capture_default_str();
  f->add_option("--tol", fit_o.tol, "relative elbo convergence tolerance")
      ->capture_default_str();
  f->add_option("--seed", fit_o.seed, "rng seed (used when shuffling)")->capture_default_str();
  f->add_flag("--shuffle", fit_o.shuffle, "shuffle coordinate update order each sweep");
  f->add_option("--out", fit_o.out, "output directory")->capture_default_str();

  AssocOpts assoc;
  CLI::App* a = app.add_subcommand("assoc", "call associations from a fit checkpoint");
  a->add_option("--geno", assoc.data.geno_path, "genotype tsv or .bed path")->required();
  a->add_option("--pheno", assoc.data.pheno_path, "phenotype tsv")->required();
  a->add_flag("--qc", assoc.data.qc, "apply the same qc used for the fit");
  a->add_option("--min-maf", assoc.data.qcfg.min_maf, "qc: minimum maf")->capture_default_str();
  a->add_option("--max-missing", assoc.data.qcfg.max_missing_rate, "qc: max missing rate")
      ->capture_default_str();
  a->add_option("--prune-r2", assoc.data.qcfg.prune_r2, "qc: LD prune r^2")->capture_default_str();
  a->add_option("--prune-window", assoc.data.qcfg.prune_window, "qc: LD prune window")
      ->capture_default_str();
  a->add_option("--checkpoint", assoc.checkpoint, "checkpoint.json from fit")->required();
  a->add_option("--fdr", assoc.fdr, "target global fdr")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  a->add_option("--out", assoc.out, "output directory")->capture_default_str();

  BenchOpts bench;
  CLI::App* b = app.add_subcommand("bench", "replicated simulation study");
  b->add_option("--n", bench.study.n_samples, "samples")->capture_default_str();
  b->add_option("--p", bench.study.n_snps, "snps")->capture_default_str();
  b->add_option("--k", bench.study.n_traits, "traits")->capture_default_str();
  b->add_option("--causal-frac", bench.study.causal_frac, "fraction of causal snps")
      ->capture_default_str();
  b->add_option("--h2", bench.study.h2, "per-trait heritability")->capture_default_str();
  b->add_option("--rho-x", bench.rho_x, "genotype correlation grid")->capture_default_str();
  b->add_option("--rho-e", bench.rho_e, "error correlation grid")->capture_default_str();
  b->add_option("--g", bench.g, "pleiotropy grid")->capture_default_str();
  b->add_option("--replicates", bench.replicates, "replicates per cell")
      ->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--fdr", bench.study.target_fdr, "target global fdr")->capture_default_str();
  b->add_option("--max-iters", bench.study.max_iters, "iteration cap per phase")
      ->capture_default_str();
  b->add_option("--tol", bench.study.elbo_rel_tol, "relative elbo tolerance")
      ->capture_default_str();
  b->add_option("--seed", bench.study.base_seed, "base seed")->capture_default_str();
  b->add_option("--threads", bench.threads, "worker pool size")
      ->envname("VIMCO_THREADS")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--out", bench.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(s)) return cmd_simulate(sim);
    if (app.got_subcommand(f)) return cmd_fit(fit_o);
    if (app.got_subcommand(a)) return cmd_assoc(assoc);
    return cmd_bench(bench);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (is_usage_error(e.kind())) return 1;
    if (is_numerical_error(e.kind())) return 3;
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

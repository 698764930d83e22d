#include "vimco/geno_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace vimco {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream is(line);
  std::string f;
  while (is >> f) fields.push_back(f);
  return fields;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& s, const std::string& context) {
  if (s.empty() || s == "NA" || s == "nan" || s == "NaN")
    fail(ErrorKind::MissingValue, "missing value in " + context);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::NonNumeric, "non-numeric field '" + s + "' in " + context);
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
  return out;
}

// dosage <-> two-bit code; the high pair of each byte holds the first
// sample of its group of four
constexpr uint8_t code_of(int8_t dosage) {
  switch (dosage) {
    case 2: return 0b00;
    case kMissing: return 0b01;
    case 1: return 0b10;
    default: return 0b11;  // dosage 0
  }
}

constexpr int8_t dosage_of(uint8_t code) {
  switch (code & 0b11) {
    case 0b00: return 2;
    case 0b01: return kMissing;
    case 0b10: return 1;
    default: return 0;
  }
}

double column_missing_rate(const RawMatrix& raw, Eigen::Index j) {
  Eigen::Index missing = 0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    missing += raw(i, j) == kMissing;
  return double(missing) / double(raw.rows());
}

// mean dosage over observed entries; NaN when everything is missing
double column_mean_observed(const RawMatrix& raw, Eigen::Index j) {
  double sum = 0.0;
  Eigen::Index seen = 0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    if (raw(i, j) == kMissing) continue;
    sum += raw(i, j);
    ++seen;
  }
  return seen > 0 ? sum / double(seen) : std::nan("");
}

}  // namespace

PlinkDataset open_plink(const std::string& prefix) {
  PlinkDataset d;
  d.bed_path = prefix + ".bed";
  d.bim_path = prefix + ".bim";
  d.fam_path = prefix + ".fam";

  {
    std::ifstream bim = open_input(d.bim_path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(bim, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const auto f = split_ws(line);
      if (f.size() != 6)
        fail(ErrorKind::MetaMismatch,
             d.bim_path + ":" + std::to_string(lineno) + ": expected 6 fields");
      SnpMeta m;
      m.chromosome = f[0];
      m.id = f[1];
      m.position = std::strtol(f[3].c_str(), nullptr, 10);
      m.allele1 = f[4];
      m.allele2 = f[5];
      d.snp_meta.push_back(std::move(m));
    }
  }
  {
    std::ifstream fam = open_input(d.fam_path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(fam, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const auto f = split_ws(line);
      if (f.size() != 6)
        fail(ErrorKind::MetaMismatch,
             d.fam_path + ":" + std::to_string(lineno) + ": expected 6 fields");
      d.sample_ids.push_back(f[1]);  // IID
    }
  }
  d.n_snps = Eigen::Index(d.snp_meta.size());
  d.n_samples = Eigen::Index(d.sample_ids.size());

  std::ifstream bed = open_input(d.bed_path);
  char header[3] = {0, 0, 0};
  bed.read(header, 3);
  if (bed.gcount() < 3 || uint8_t(header[0]) != 0x6C ||
      uint8_t(header[1]) != 0x1B)
    fail(ErrorKind::BadMagic, d.bed_path + ": not a PLINK .bed file");
  if (uint8_t(header[2]) != 0x01)
    fail(ErrorKind::BadMagic,
         d.bed_path + ": only SNP-major mode (0x01) is supported");

  bed.seekg(0, std::ios::end);
  const auto actual = static_cast<long long>(bed.tellg());
  const long long bytes_per_snp = (d.n_samples + 3) / 4;
  const long long expected = 3 + bytes_per_snp * d.n_snps;
  if (actual < expected)
    fail(ErrorKind::TruncatedFile,
         d.bed_path + ": expected " + std::to_string(expected) + " bytes, got " +
             std::to_string(actual));
  if (actual > expected)
    fail(ErrorKind::MetaMismatch,
         d.bed_path + ": file longer than .bim/.fam imply (" +
             std::to_string(actual) + " vs " + std::to_string(expected) + ")");
  return d;
}

RawMatrix read_plink(const PlinkDataset& dataset) {
  std::ifstream bed = open_input(dataset.bed_path);
  bed.seekg(3);
  const Eigen::Index n = dataset.n_samples;
  const Eigen::Index p = dataset.n_snps;
  const Eigen::Index bytes_per_snp = (n + 3) / 4;

  RawMatrix raw(n, p);
  std::vector<char> buf(static_cast<size_t>(bytes_per_snp));
  for (Eigen::Index j = 0; j < p; ++j) {
    bed.read(buf.data(), bytes_per_snp);
    if (bed.gcount() != bytes_per_snp)
      fail(ErrorKind::TruncatedFile, dataset.bed_path + ": short read");
    for (Eigen::Index i = 0; i < n; ++i) {
      const uint8_t byte = uint8_t(buf[size_t(i / 4)]);
      const int shift = 6 - 2 * int(i % 4);  // first sample in the high pair
      raw(i, j) = dosage_of(uint8_t(byte >> shift));
    }
  }
  return raw;
}

void write_plink(const std::string& prefix, const RawMatrix& raw,
                 const std::vector<SnpMeta>& snp_meta,
                 const std::vector<std::string>& sample_ids) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index p = raw.cols();
  if (!snp_meta.empty() && Eigen::Index(snp_meta.size()) != p)
    fail(ErrorKind::DimensionMismatch, "snp_meta size does not match matrix");
  if (!sample_ids.empty() && Eigen::Index(sample_ids.size()) != n)
    fail(ErrorKind::DimensionMismatch, "sample_ids size does not match matrix");

  {
    std::ofstream bim = open_output(prefix + ".bim");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (snp_meta.empty())
        bim << "1\tsnp" << j + 1 << "\t0\t" << j + 1 << "\tA\tB\n";
      else
        bim << snp_meta[size_t(j)].chromosome << '\t' << snp_meta[size_t(j)].id
            << "\t0\t" << snp_meta[size_t(j)].position << '\t'
            << snp_meta[size_t(j)].allele1 << '\t'
            << snp_meta[size_t(j)].allele2 << '\n';
    }
  }
  {
    std::ofstream fam = open_output(prefix + ".fam");
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string id =
          sample_ids.empty() ? "ind" + std::to_string(i + 1)
                             : sample_ids[size_t(i)];
      fam << id << '\t' << id << "\t0\t0\t0\t-9\n";
    }
  }

  std::ofstream bed = open_output(prefix + ".bed");
  const char header[3] = {char(0x6C), char(0x1B), char(0x01)};
  bed.write(header, 3);
  const Eigen::Index bytes_per_snp = (n + 3) / 4;
  std::vector<char> buf(static_cast<size_t>(bytes_per_snp));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::fill(buf.begin(), buf.end(), char(0));
    for (Eigen::Index i = 0; i < n; ++i) {
      const int shift = 6 - 2 * int(i % 4);
      buf[size_t(i / 4)] |= char(code_of(raw(i, j)) << shift);
    }
    bed.write(buf.data(), bytes_per_snp);
  }
  if (!bed) fail(ErrorKind::IoFailure, "write failed for " + prefix + ".bed");
}

QcResult qc_filter(const RawMatrix& raw, const QcConfig& qc) {
  QcResult out;
  const Eigen::Index p = raw.cols();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (column_missing_rate(raw, j) > qc.max_missing_rate) {
      ++out.report.dropped_missing;
      continue;
    }
    const double mean = column_mean_observed(raw, j);
    const double af = mean / 2.0;
    const double maf = std::isnan(af) ? 0.0 : std::min(af, 1.0 - af);
    bool constant = true;
    int8_t first = kMissing;
    for (Eigen::Index i = 0; i < raw.rows() && constant; ++i) {
      if (raw(i, j) == kMissing) continue;
      if (first == kMissing)
        first = raw(i, j);
      else if (raw(i, j) != first)
        constant = false;
    }
    if (maf < qc.min_maf || constant) {
      ++out.report.dropped_maf;
      continue;
    }
    out.kept_indices.push_back(j);
  }
  out.report.kept = Eigen::Index(out.kept_indices.size());
  out.filtered.resize(raw.rows(), out.report.kept);
  for (Eigen::Index c = 0; c < out.report.kept; ++c)
    out.filtered.col(c) = raw.col(out.kept_indices[size_t(c)]);
  return out;
}

std::vector<Eigen::Index> ld_prune(const RawMatrix& raw, double r2,
                                   int window) {
  if (!(r2 > 0.0 && r2 < 1.0))
    fail(ErrorKind::InvalidConfig, "prune r2 must lie in (0,1)");
  if (window < 1) fail(ErrorKind::InvalidConfig, "prune window must be >= 1");

  const Eigen::Index n = raw.rows();
  const Eigen::Index p = raw.cols();

  // centered mean-imputed columns, plus per-column missingness for the
  // drop rule
  Matrix imp(n, p);
  std::vector<double> missing(static_cast<size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = column_mean_observed(raw, j);
    missing[size_t(j)] = column_missing_rate(raw, j);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = raw(i, j) == kMissing ? mean : double(raw(i, j));
      imp(i, j) = v;
    }
    imp.col(j).array() -= imp.col(j).mean();
  }
  const Vector sq = imp.colwise().squaredNorm();

  std::vector<bool> dropped(size_t(p), false);
  std::vector<Eigen::Index> recent;  // kept SNPs within the window
  for (Eigen::Index j = 0; j < p; ++j) {
    while (!recent.empty() && j - recent.front() >= window)
      recent.erase(recent.begin());
    for (Eigen::Index i : recent) {
      if (dropped[size_t(i)]) continue;  // evicted by an earlier pair
      if (sq[i] == 0.0 || sq[j] == 0.0) continue;
      const double dot = imp.col(i).dot(imp.col(j));
      if (dot * dot / (sq[i] * sq[j]) <= r2) continue;
      // drop the higher-missingness member; ties drop the later SNP
      if (missing[size_t(i)] > missing[size_t(j)])
        dropped[size_t(i)] = true;
      else
        dropped[size_t(j)] = true;
      if (dropped[size_t(j)]) break;
    }
    if (!dropped[size_t(j)]) recent.push_back(j);
  }

  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < p; ++j)
    if (!dropped[size_t(j)]) kept.push_back(j);
  return kept;
}

GenotypeMatrix assemble_genotypes(const RawMatrix& raw,
                                  std::vector<std::string> snp_ids) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index p = raw.cols();
  Matrix dense(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = column_mean_observed(raw, j);
    if (std::isnan(mean))
      fail(ErrorKind::MissingValue,
           "SNP column " + std::to_string(j) + " is entirely missing");
    for (Eigen::Index i = 0; i < n; ++i)
      dense(i, j) = raw(i, j) == kMissing ? mean : double(raw(i, j));
  }
  return GenotypeMatrix(center_columns(dense), std::move(snp_ids));
}

PhenotypeMatrix load_pheno_tsv(const std::string& path,
                               const std::vector<std::string>& sample_order) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::TruncatedFile, path + ": empty file");
  const auto header = split_tabs(strip_cr(line));
  if (header.size() < 2 || header[0] != "sample_id")
    fail(ErrorKind::MetaMismatch,
         path + ": header must start with 'sample_id' and name >= 1 trait");
  std::vector<std::string> trait_ids(header.begin() + 1, header.end());
  const size_t n_traits = trait_ids.size();

  std::unordered_map<std::string, std::vector<double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const std::string context = path + ":" + std::to_string(lineno);
    if (f.size() != n_traits + 1)
      fail(ErrorKind::MetaMismatch, context + ": wrong field count");
    std::vector<double> vals(n_traits);
    for (size_t t = 0; t < n_traits; ++t) vals[t] = parse_double(f[t + 1], context);
    if (!rows.emplace(f[0], std::move(vals)).second)
      fail(ErrorKind::MetaMismatch, context + ": duplicate sample " + f[0]);
  }

  if (rows.size() != sample_order.size())
    fail(ErrorKind::MetaMismatch,
         path + ": has " + std::to_string(rows.size()) + " samples, expected " +
             std::to_string(sample_order.size()));
  Matrix y(Eigen::Index(sample_order.size()), Eigen::Index(n_traits));
  for (size_t i = 0; i < sample_order.size(); ++i) {
    const auto it = rows.find(sample_order[i]);
    if (it == rows.end())
      fail(ErrorKind::UnknownSample,
           path + ": sample " + sample_order[i] + " not found");
    for (size_t t = 0; t < n_traits; ++t)
      y(Eigen::Index(i), Eigen::Index(t)) = it->second[t];
  }
  return PhenotypeMatrix(center_columns(y), std::move(trait_ids));
}

void write_geno_tsv(const std::string& path, const RawMatrix& raw,
                    const std::vector<std::string>& snp_ids,
                    const std::vector<std::string>& sample_ids) {
  if (Eigen::Index(snp_ids.size()) != raw.cols() ||
      Eigen::Index(sample_ids.size()) != raw.rows())
    fail(ErrorKind::DimensionMismatch, "id lists do not match matrix");
  std::ofstream out = open_output(path);
  out << "snp_id";
  for (const auto& s : sample_ids) out << '\t' << s;
  out << '\n';
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    out << snp_ids[size_t(j)];
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      if (raw(i, j) == kMissing)
        out << "\tNA";
      else
        out << '\t' << int(raw(i, j));
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

GenoTable read_geno_tsv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::TruncatedFile, path + ": empty file");
  const auto header = split_tabs(strip_cr(line));
  if (header.size() < 2 || header[0] != "snp_id")
    fail(ErrorKind::MetaMismatch, path + ": header must start with 'snp_id'");

  GenoTable table;
  table.sample_ids.assign(header.begin() + 1, header.end());
  const size_t n = table.sample_ids.size();

  std::vector<std::vector<int8_t>> cols;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const std::string context = path + ":" + std::to_string(lineno);
    if (f.size() != n + 1)
      fail(ErrorKind::MetaMismatch, context + ": wrong field count");
    table.snp_ids.push_back(f[0]);
    std::vector<int8_t> col(n);
    for (size_t i = 0; i < n; ++i) {
      const std::string& v = f[i + 1];
      if (v == "NA") {
        col[i] = kMissing;
      } else if (v == "0" || v == "1" || v == "2") {
        col[i] = int8_t(v[0] - '0');
      } else {
        fail(ErrorKind::NonNumeric, context + ": bad dosage '" + v + "'");
      }
    }
    cols.push_back(std::move(col));
  }

  table.raw.resize(Eigen::Index(n), Eigen::Index(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t i = 0; i < n; ++i)
      table.raw(Eigen::Index(i), Eigen::Index(j)) = cols[j][i];
  return table;
}

void write_pheno_tsv(const std::string& path, const Matrix& values,
                     const std::vector<std::string>& trait_ids,
                     const std::vector<std::string>& sample_ids) {
  if (Eigen::Index(trait_ids.size()) != values.cols() ||
      Eigen::Index(sample_ids.size()) != values.rows())
    fail(ErrorKind::DimensionMismatch, "id lists do not match matrix");
  std::ofstream out = open_output(path);
  out << "sample_id";
  for (const auto& t : trait_ids) out << '\t' << t;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << sample_ids[size_t(i)];
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", values(i, k));
      out << '\t' << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

void write_truth_tsv(const std::string& path, const SparseEffects& truth,
                     const std::vector<std::string>& snp_ids,
                     const std::vector<std::string>& trait_ids) {
  std::ofstream out = open_output(path);
  out << "snp_id\ttrait_id\tbeta\n";
  char buf[32];
  for (Eigen::Index j = 0; j < truth.n_snps(); ++j)
    for (Eigen::Index k = 0; k < truth.n_traits(); ++k) {
      if (!truth.gamma(j, k)) continue;
      std::snprintf(buf, sizeof buf, "%.17g", truth.beta_tilde(j, k));
      out << snp_ids[size_t(j)] << '\t' << trait_ids[size_t(k)] << '\t' << buf
          << '\n';
    }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

void write_association_tsv(const std::string& path,
                           const AssociationReport& report,
                           const Matrix& alpha,
                           const std::vector<std::string>& snp_ids,
                           const std::vector<std::string>& trait_ids) {
  std::ofstream out = open_output(path);
  out << "snp_id\ttrait_id\talpha\tlfdr\trejected\n";
  std::vector<std::vector<char>> rejected(
      size_t(alpha.rows()), std::vector<char>(size_t(alpha.cols()), 0));
  for (const auto& [j, k] : report.rejections)
    rejected[size_t(j)][size_t(k)] = 1;
  char buf[32];
  for (Eigen::Index j = 0; j < alpha.rows(); ++j)
    for (Eigen::Index k = 0; k < alpha.cols(); ++k) {
      out << snp_ids[size_t(j)] << '\t' << trait_ids[size_t(k)];
      std::snprintf(buf, sizeof buf, "%.6g", alpha(j, k));
      out << '\t' << buf;
      std::snprintf(buf, sizeof buf, "%.6g", report.lfdr(j, k));
      out << '\t' << buf << '\t' << int(rejected[size_t(j)][size_t(k)]) << '\n';
    }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

}  // namespace vimco

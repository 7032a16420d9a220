#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "depbench/errors.hpp"
#include "depbench/io.hpp"
#include "depbench/micest.hpp"
#include "depbench/parallel.hpp"
#include "depbench/rng.hpp"
#include "depbench/util.hpp"

namespace depbench::scan {

struct LoadOptions {
  std::vector<std::string> na_tokens{"", "NA", "NaN", "nan", "null"};
  bool strict = false;
  int min_non_missing = 30;
};

struct DataMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // values; meaningless where missing
  std::vector<std::vector<char>> missing;
  int rows = 0;
  std::vector<std::string> warnings;
};

inline bool is_na_token(const std::string& s, const LoadOptions& opt) {
  for (const auto& t : opt.na_tokens)
    if (s == t) return true;
  return false;
}

inline DataMatrix load_matrix(std::istream& in, const LoadOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(Error::Kind::parse_error, "matrix CSV is empty");
  auto header = io::split_csv_row(line);
  std::size_t m = header.size();
  if (m < 2)
    throw Error(Error::Kind::parse_error, "matrix needs at least 2 columns");

  std::vector<std::vector<double>> cols(m);
  std::vector<std::vector<char>> miss(m);
  std::vector<bool> numeric(m, true);
  int row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    auto fields = io::split_csv_row(line);
    if (fields.size() != m)
      throw Error(Error::Kind::parse_error,
                  "row " + std::to_string(row_number) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(m));
    for (std::size_t c = 0; c < m; ++c) {
      if (is_na_token(fields[c], opt)) {
        cols[c].push_back(0.0);
        miss[c].push_back(1);
        continue;
      }
      bool ok = false;
      double v = util::parse_double(fields[c], ok);
      if (!ok) {
        if (opt.strict)
          throw Error(Error::Kind::parse_error,
                      "row " + std::to_string(row_number) + ", column '" +
                          header[c] + "': cannot parse '" + fields[c] + "'");
        numeric[c] = false;
        cols[c].push_back(0.0);
        miss[c].push_back(1);
        continue;
      }
      cols[c].push_back(v);
      miss[c].push_back(0);
    }
  }

  DataMatrix out;
  out.rows = cols.empty() ? 0 : static_cast<int>(cols[0].size());
  for (std::size_t c = 0; c < m; ++c) {
    if (!numeric[c]) {
      out.warnings.push_back("column '" + header[c] + "' skipped: non-numeric");
      continue;
    }
    int present = 0;
    for (char flag : miss[c])
      if (!flag) ++present;
    if (present == 0) {
      out.warnings.push_back("column '" + header[c] + "' skipped: all missing");
      continue;
    }
    out.names.push_back(header[c]);
    out.columns.push_back(std::move(cols[c]));
    out.missing.push_back(std::move(miss[c]));
  }
  if (out.names.size() < 2)
    throw Error(Error::Kind::parse_error,
                "fewer than 2 usable numeric columns in matrix");
  return out;
}

inline DataMatrix load_matrix(const std::filesystem::path& path,
                              const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::io_error, "cannot open " + path.string());
  return load_matrix(in, opt);
}

// ---------------------------------------------------------------------------
// Empirical TIC_e null tables. TIC_e is rank-based, so the null law depends
// on the sample size (and parameters) only; one table per n bucket serves
// every pair.

struct NullTable {
  int n = 0;
  double alpha = 0.0;
  int c = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<double> scores;  // sorted ascending

  double p_value(double observed) const {
    // (1 + #null >= observed) / (reps + 1)
    auto it = std::lower_bound(scores.begin(), scores.end(), observed);
    std::size_t ge = scores.size() - static_cast<std::size_t>(it - scores.begin());
    return (1.0 + static_cast<double>(ge)) / (static_cast<double>(scores.size()) + 1.0);
  }
};

// exact n up to 1000, then a geometric ladder with ratio 1.25
inline int bucket_n(int n) {
  if (n <= 1000) return n;
  double b = 1000.0;
  while (std::ceil(b * 1.25) <= n) b = std::ceil(b * 1.25);
  return static_cast<int>(b);
}

inline std::uint64_t params_hash(double alpha, int c) {
  std::uint64_t bits;
  std::memcpy(&bits, &alpha, 8);
  return rng::mix(bits, static_cast<std::uint64_t>(c));
}

inline NullTable build_null_table(int n, double alpha, int c, int reps,
                                  std::uint64_t seed) {
  if (n < 30)
    throw Error(Error::Kind::invalid_sample, "null table needs n >= 30");
  NullTable table;
  table.n = n;
  table.alpha = alpha;
  table.c = c;
  table.reps = reps;
  table.seed = seed;
  table.scores.resize(reps);
  micest::MicParams params;
  params.alpha = alpha;
  params.c = c;
  for (int r = 0; r < reps; ++r) {
    rng::Xoshiro256 gen(rng::derive_seed(seed, "tic-null",
                                         static_cast<std::uint64_t>(r)));
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) xs[i] = gen.next_double();
    for (int i = 0; i < n; ++i) ys[i] = gen.next_double();
    core::Sample sample(std::move(xs), std::move(ys));
    table.scores[r] = micest::tic_e(sample, params);
  }
  std::sort(table.scores.begin(), table.scores.end());
  return table;
}

constexpr std::uint32_t kNullTableVersion = 1;

inline std::string encode_null_table(const NullTable& t) {
  std::string out;
  out.reserve(32 + 8 * t.scores.size());
  out += "DBNT";
  io::put_u32(out, kNullTableVersion);
  io::put_u32(out, static_cast<std::uint32_t>(t.n));
  io::put_u32(out, static_cast<std::uint32_t>(t.reps));
  io::put_u64(out, t.seed);
  io::put_u64(out, params_hash(t.alpha, t.c));
  for (double s : t.scores) io::put_f64(out, s);
  return out;
}

inline std::optional<NullTable> decode_null_table(const std::string& data,
                                                  double alpha, int c) {
  if (data.size() < 32 || data.compare(0, 4, "DBNT") != 0) return std::nullopt;
  std::size_t pos = 4;
  if (io::get_u32(data, pos) != kNullTableVersion) return std::nullopt;
  NullTable t;
  t.n = static_cast<int>(io::get_u32(data, pos));
  t.reps = static_cast<int>(io::get_u32(data, pos));
  t.seed = io::get_u64(data, pos);
  std::uint64_t hash = io::get_u64(data, pos);
  if (hash != params_hash(alpha, c)) return std::nullopt;
  if (data.size() != 32 + static_cast<std::size_t>(t.reps) * 8) return std::nullopt;
  t.alpha = alpha;
  t.c = c;
  t.scores.resize(t.reps);
  for (int i = 0; i < t.reps; ++i) t.scores[i] = io::get_f64(data, pos);
  return t;
}

inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("DEPBENCH_CACHE_DIR")) return env;
  if (const char* home = std::getenv("HOME"))
    return std::filesystem::path(home) / ".cache" / "depbench";
  return ".depbench_cache";
}

inline std::filesystem::path null_table_path(int n, double alpha, int c,
                                             int reps, std::uint64_t seed) {
  std::string name = "tic_null_n" + std::to_string(n) + "_r" +
                     std::to_string(reps) + "_h" +
                     io::hex64(params_hash(alpha, c)) + "_s" + io::hex64(seed) +
                     ".bin";
  return cache_dir() / name;
}

inline NullTable cached_null_table(int n, double alpha, int c, int reps,
                                   std::uint64_t seed) {
  auto path = null_table_path(n, alpha, c, reps, seed);
  if (std::filesystem::exists(path)) {
    auto decoded = decode_null_table(io::read_file(path), alpha, c);
    if (decoded && decoded->n == n && decoded->reps == reps &&
        decoded->seed == seed)
      return *decoded;
  }
  auto table = build_null_table(n, alpha, c, reps, seed);
  io::ensure_dir(path.parent_path());
  io::write_file(path, encode_null_table(table));
  return table;
}

// ---------------------------------------------------------------------------
// The all-pairs workflow: screen with TIC_e, control FDR, rank survivors by
// MIC_e.

struct ScanParams {
  double tic_alpha = 0.0;  // 0 = power preset for the matrix row count
  int tic_c = 0;
  double mic_alpha = 0.0;  // 0 = equitability preset
  int mic_c = 0;
  double fdr_q = 0.05;
  int null_reps = 10000;
  std::uint64_t seed = 0;  // drives null-table generation only
  int min_pairs = 30;
  unsigned workers = 1;

  void resolve(int n_rows) {
    if (tic_alpha <= 0.0) {
      auto p = micest::presets::power_tic(n_rows);
      tic_alpha = p.alpha;
      if (tic_c <= 0) tic_c = p.c;
    }
    if (tic_c <= 0) tic_c = 5;
    if (mic_alpha <= 0.0) {
      auto p = micest::presets::equitability_mic(n_rows);
      mic_alpha = p.alpha;
      if (mic_c <= 0) mic_c = p.c;
    }
    if (mic_c <= 0) mic_c = 5;
  }
};

struct PairResult {
  int i = 0, j = 0;
  std::string col_i, col_j;
  int n_effective = 0;
  double tic_e = 0.0;
  double p_value = 1.0;
  double q_value = 1.0;
  bool significant = false;
  double mic_e = 0.0;  // meaningful only when significant
  int argmax_k = 0, argmax_l = 0;
};

struct ExcludedPair {
  int i = 0, j = 0;
  std::string col_i, col_j;
  int n_effective = 0;
};

struct ScanReport {
  ScanParams params;
  std::vector<PairResult> pairs;      // survivors by mic desc, then p asc
  std::vector<ExcludedPair> excluded;
  std::vector<std::string> null_table_digests;
};

namespace detail {

inline std::optional<core::Sample> pair_sample(const DataMatrix& m, int i, int j,
                                               int min_pairs) {
  std::vector<double> xs, ys;
  for (int r = 0; r < m.rows; ++r) {
    if (!m.missing[i][r] && !m.missing[j][r]) {
      xs.push_back(m.columns[i][r]);
      ys.push_back(m.columns[j][r]);
    }
  }
  if (static_cast<int>(xs.size()) < min_pairs) return std::nullopt;
  return core::Sample(std::move(xs), std::move(ys));
}

// Benjamini-Hochberg adjusted p-values.
inline std::vector<double> bh_adjust(const std::vector<double>& p) {
  std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> q(m, 0.0);
  double running = 1.0;
  for (std::size_t rank = m; rank-- > 0;) {
    double adj = p[order[rank]] * static_cast<double>(m) /
                 static_cast<double>(rank + 1);
    running = std::min(running, adj);
    q[order[rank]] = running;
  }
  return q;
}

}  // namespace detail

inline ScanReport scan_matrix(const DataMatrix& matrix, ScanParams params) {
  params.resolve(matrix.rows);
  int m = static_cast<int>(matrix.names.size());
  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) all_pairs.emplace_back(i, j);

  struct PairWork {
    bool excluded = false;
    int n_eff = 0;
    double tic = 0.0;
  };
  std::vector<PairWork> work(all_pairs.size());
  micest::MicParams tic_params;
  tic_params.alpha = params.tic_alpha;
  tic_params.c = params.tic_c;

  parallel::parallel_for(all_pairs.size(), params.workers, [&](std::size_t t) {
    auto [i, j] = all_pairs[t];
    auto sample = detail::pair_sample(matrix, i, j, params.min_pairs);
    if (!sample) {
      work[t].excluded = true;
      std::vector<double> xs, ys;
      int n_eff = 0;
      for (int r = 0; r < matrix.rows; ++r)
        if (!matrix.missing[i][r] && !matrix.missing[j][r]) ++n_eff;
      work[t].n_eff = n_eff;
      return;
    }
    work[t].n_eff = sample->n();
    work[t].tic = micest::tic_e(*sample, tic_params);
  });

  // p-values against per-bucket null tables (built serially; cached on disk)
  std::map<int, NullTable> tables;
  std::vector<std::string> digests;
  ScanReport report;
  std::vector<PairResult> rows;
  std::vector<double> pvals;
  for (std::size_t t = 0; t < all_pairs.size(); ++t) {
    auto [i, j] = all_pairs[t];
    if (work[t].excluded) {
      report.excluded.push_back(
          {i, j, matrix.names[i], matrix.names[j], work[t].n_eff});
      continue;
    }
    int bucket = bucket_n(work[t].n_eff);
    auto it = tables.find(bucket);
    if (it == tables.end()) {
      auto table = cached_null_table(bucket, params.tic_alpha, params.tic_c,
                                     params.null_reps,
                                     rng::derive_seed(params.seed, "scan-null"));
      digests.push_back("n" + std::to_string(bucket) + ":" +
                        io::hex64(io::fnv64(encode_null_table(table))));
      it = tables.emplace(bucket, std::move(table)).first;
    }
    PairResult r;
    r.i = i;
    r.j = j;
    r.col_i = matrix.names[i];
    r.col_j = matrix.names[j];
    r.n_effective = work[t].n_eff;
    r.tic_e = work[t].tic;
    r.p_value = it->second.p_value(r.tic_e);
    rows.push_back(r);
    pvals.push_back(r.p_value);
  }
  auto qvals = detail::bh_adjust(pvals);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].q_value = qvals[t];
    rows[t].significant = qvals[t] <= params.fdr_q;
  }

  // MIC_e with ranking parameters, survivors only
  micest::MicParams mic_params;
  mic_params.alpha = params.mic_alpha;
  mic_params.c = params.mic_c;
  std::vector<std::size_t> survivors;
  for (std::size_t t = 0; t < rows.size(); ++t)
    if (rows[t].significant) survivors.push_back(t);
  parallel::parallel_for(survivors.size(), params.workers, [&](std::size_t s) {
    auto& r = rows[survivors[s]];
    auto sample = detail::pair_sample(matrix, r.i, r.j, params.min_pairs);
    auto result = micest::mic_result(*sample, mic_params);
    r.mic_e = result.mic_e;
    r.argmax_k = result.argmax_grid.first;
    r.argmax_l = result.argmax_grid.second;
  });

  std::stable_sort(rows.begin(), rows.end(),
                   [](const PairResult& a, const PairResult& b) {
                     if (a.significant != b.significant) return a.significant;
                     if (a.significant && a.mic_e != b.mic_e)
                       return a.mic_e > b.mic_e;
                     if (a.p_value != b.p_value) return a.p_value < b.p_value;
                     if (a.i != b.i) return a.i < b.i;
                     return a.j < b.j;
                   });
  report.params = params;
  report.pairs = std::move(rows);
  report.null_table_digests = std::move(digests);
  return report;
}

inline std::string report_csv(const ScanReport& report) {
  std::string out = "pair,n_effective,tic_e,p,q,mic_e,argmax_k,argmax_l\n";
  for (const auto& r : report.pairs) {
    out += r.col_i + ":" + r.col_j + "," + std::to_string(r.n_effective) + "," +
           util::format_double(r.tic_e) + "," + util::format_double(r.p_value) +
           "," + util::format_double(r.q_value) + ",";
    if (r.significant)
      out += util::format_double(r.mic_e) + "," + std::to_string(r.argmax_k) +
             "," + std::to_string(r.argmax_l);
    else
      out += ",,";
    out += "\n";
  }
  return out;
}

}  // namespace depbench::scan

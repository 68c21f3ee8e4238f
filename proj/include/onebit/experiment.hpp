#pragma once

// Monte Carlo sweep over (pilot length, SNR, trial) cells of the full
// estimation pipeline, with deterministic per-trial seeding and CSV output.

#include "onebit/metrics.hpp"
#include "onebit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace onebit::experiment {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CfoMode {
  kExplicit,  // delta_f_hz listed per pilot length
  kHalfBin,   // (floor(nominal * Np * T) + 0.5) bins
};

struct ExperimentConfig {
  std::vector<int> n_p_list{32, 64};
  std::vector<double> snr_db_list{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0};
  int n_trials = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  double carrier_hz = 28e9;
  double symbol_period_s = 0.5e-6;
  CfoMode cfo_mode = CfoMode::kHalfBin;
  std::vector<double> delta_f_hz;  // explicit mode, aligned with n_p_list
  double cfo_nominal_hz = 100e3;   // half-bin mode
  channel::ChannelModelConfig channel;
  gamp::GampConfig gamp;
  double lambda0 = 0.1;
  bool record_runtime = true;
  std::string output_path = "results.csv";

  int n_tx() const { return channel.n_tx; }
  int n_rx() const { return channel.n_rx; }

  void validate() const {
    channel.validate();
    gamp.validate();
    if (n_trials < 1) throw ConfigError("trials must be >= 1");
    if (n_p_list.empty()) throw ConfigError("n_p list must be nonempty");
    if (snr_db_list.empty()) throw ConfigError("snr_db list must be nonempty");
    for (int np : n_p_list)
      if (np < 2) throw ConfigError("every pilot length must be >= 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(symbol_period_s > 0.0)) throw ConfigError("symbol_period_s must be positive");
    if (!(lambda0 > 0.0 && lambda0 <= 1.0)) throw ConfigError("gamp.lambda0 must be in (0, 1]");
    if (cfo_mode == CfoMode::kExplicit && delta_f_hz.size() != n_p_list.size())
      throw ConfigError("cfo.delta_f_hz must list one offset per pilot length");
    if (cfo_mode == CfoMode::kHalfBin && !(cfo_nominal_hz >= 0.0))
      throw ConfigError("cfo.nominal_hz must be nonnegative");
  }

  /// CFO in Hz used for the pilot length at n_p_index.
  double delta_f_for(std::size_t n_p_index) const {
    const int np = n_p_list.at(n_p_index);
    if (cfo_mode == CfoMode::kExplicit) return delta_f_hz.at(n_p_index);
    const double bin_hz = 1.0 / (static_cast<double>(np) * symbol_period_s);
    return (std::floor(cfo_nominal_hz / bin_hz) + 0.5) * bin_hz;
  }

  frontend::CfoParams cfo_for(std::size_t n_p_index) const {
    return frontend::CfoParams::from_frequency(delta_f_for(n_p_index), symbol_period_s);
  }
};

/// 16x16 ULAs at half-wavelength spacing, 2 clusters of 15 rays with 10 degree
/// spread, T = 0.5 us, fc = 28 GHz, Np in {32, 64} with the half-bin offsets
/// 93.75 kHz and 109.375 kHz.
inline ExperimentConfig paper_preset() {
  ExperimentConfig cfg;
  cfg.channel.n_tx = 16;
  cfg.channel.n_rx = 16;
  cfg.channel.n_clusters = 2;
  cfg.channel.rays_per_cluster = 15;
  cfg.channel.angle_spread_deg = 10.0;
  cfg.channel.antenna_spacing_ratio = 0.5;
  cfg.symbol_period_s = 0.5e-6;
  cfg.carrier_hz = 28e9;
  cfg.n_p_list = {32, 64};
  cfg.cfo_mode = CfoMode::kHalfBin;
  cfg.cfo_nominal_hz = 100e3;
  cfg.delta_f_hz.clear();
  return cfg;
}

// ---------------------------------------------------------------------------
// Config text: one `key = value` per line, `#` comments, optional `[section]`
// headers that prefix the following keys as `section.key`. Unknown keys are
// errors.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + v);
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for '" + key + "': " + v);
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("invalid unsigned integer for '" + key + "': " + v);
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + v);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : detail::split_list(v)) out.push_back(detail::parse_double(key, s));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : detail::split_list(v)) out.push_back(static_cast<int>(detail::parse_int(key, s)));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

/// Applies a single dotted key to cfg.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"n_tx", [&](const std::string& v) { cfg.channel.n_tx = static_cast<int>(parse_int(key, v)); }},
      {"n_rx", [&](const std::string& v) { cfg.channel.n_rx = static_cast<int>(parse_int(key, v)); }},
      {"n_p", [&](const std::string& v) { cfg.n_p_list = parse_int_list(key, v); }},
      {"snr_db", [&](const std::string& v) { cfg.snr_db_list = parse_double_list(key, v); }},
      {"trials", [&](const std::string& v) { cfg.n_trials = static_cast<int>(parse_int(key, v)); }},
      {"seed", [&](const std::string& v) { cfg.seed = parse_u64(key, v); }},
      {"threads", [&](const std::string& v) { cfg.threads = static_cast<int>(parse_int(key, v)); }},
      {"output", [&](const std::string& v) { cfg.output_path = v; }},
      {"record_runtime", [&](const std::string& v) { cfg.record_runtime = parse_bool(key, v); }},
      {"carrier_hz", [&](const std::string& v) { cfg.carrier_hz = parse_double(key, v); }},
      {"symbol_period_s", [&](const std::string& v) { cfg.symbol_period_s = parse_double(key, v); }},
      {"cfo.mode",
       [&](const std::string& v) {
         if (v == "explicit") cfg.cfo_mode = CfoMode::kExplicit;
         else if (v == "half_bin") cfg.cfo_mode = CfoMode::kHalfBin;
         else throw ConfigError("cfo.mode must be 'explicit' or 'half_bin', got: " + v);
       }},
      {"cfo.delta_f_hz", [&](const std::string& v) { cfg.delta_f_hz = parse_double_list(key, v); }},
      {"cfo.nominal_hz", [&](const std::string& v) { cfg.cfo_nominal_hz = parse_double(key, v); }},
      {"channel.n_clusters", [&](const std::string& v) { cfg.channel.n_clusters = static_cast<int>(parse_int(key, v)); }},
      {"channel.rays_per_cluster",
       [&](const std::string& v) { cfg.channel.rays_per_cluster = static_cast<int>(parse_int(key, v)); }},
      {"channel.angle_spread_deg", [&](const std::string& v) { cfg.channel.angle_spread_deg = parse_double(key, v); }},
      {"channel.antenna_spacing_ratio",
       [&](const std::string& v) { cfg.channel.antenna_spacing_ratio = parse_double(key, v); }},
      {"gamp.max_iters", [&](const std::string& v) { cfg.gamp.max_iters = static_cast<int>(parse_int(key, v)); }},
      {"gamp.tol", [&](const std::string& v) { cfg.gamp.tol = parse_double(key, v); }},
      {"gamp.damping", [&](const std::string& v) { cfg.gamp.damping = parse_double(key, v); }},
      {"gamp.variance_floor", [&](const std::string& v) { cfg.gamp.variance_floor = parse_double(key, v); }},
      {"gamp.em_enabled", [&](const std::string& v) { cfg.gamp.em_enabled = parse_bool(key, v); }},
      {"gamp.em_start_iter", [&](const std::string& v) { cfg.gamp.em_start_iter = static_cast<int>(parse_int(key, v)); }},
      {"gamp.variance_mode",
       [&](const std::string& v) {
         if (v == "scalar") cfg.gamp.variance_mode = gamp::VarianceMode::kScalar;
         else if (v == "vector") cfg.gamp.variance_mode = gamp::VarianceMode::kVector;
         else throw ConfigError("gamp.variance_mode must be 'scalar' or 'vector', got: " + v);
       }},
      {"gamp.lambda0", [&](const std::string& v) { cfg.lambda0 = parse_double(key, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key: " + key);
  it->second(value);
}

/// Parses config text on top of base.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

// ---------------------------------------------------------------------------
// Seeding

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// seed = mix(mix(mix(mix(master) ^ np_index) ^ snr_index) ^ trial).
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n_p_index, std::size_t snr_index,
                                std::size_t trial) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(n_p_index));
  h = mix64(h ^ static_cast<std::uint64_t>(snr_index));
  return mix64(h ^ static_cast<std::uint64_t>(trial));
}

// ---------------------------------------------------------------------------
// Trials

struct TrialRecord {
  double snr_db = 0.0;
  int n_p = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  double cfo_sq_err = 0.0;
  double rate_bits = 0.0;
  int gamp_iters = 0;
  double sigma1_ratio = 0.0;
  double runtime_ms = 0.0;
  bool diverged = false;
  std::size_t n_p_index = 0;
  std::size_t snr_index = 0;
};

/// Number of one-bit measurements consumed by a trial: 2 Np Nrx.
inline std::size_t measurement_bits(int n_p, int n_rx) {
  return 2 * static_cast<std::size_t>(n_p) * static_cast<std::size_t>(n_rx);
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t n_p_index, std::size_t snr_index,
                             std::size_t trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.n_p_index = n_p_index;
  rec.snr_index = snr_index;
  rec.n_p = cfg.n_p_list.at(n_p_index);
  rec.snr_db = cfg.snr_db_list.at(snr_index);
  rec.trial = static_cast<int>(trial);
  rec.seed = trial_seed(cfg.seed, n_p_index, snr_index, trial);

  std::mt19937_64 rng(rec.seed);
  const frontend::CfoParams cfo = cfg.cfo_for(n_p_index);
  const ProblemInstance inst = simulate_instance(cfg.channel, rec.n_p, rec.snr_db, cfo, rng);

  try {
    const EstimationOutput out = estimate_joint(inst.training, inst.y, cfg.gamp, gamp::OneBitOutput{}, cfg.lambda0);
    const metrics::NmseResult nmse = metrics::channel_nmse(inst.h, out.estimate.h_hat);
    rec.nmse_linear = nmse.nmse_linear;
    rec.nmse_db = nmse.nmse_db;
    rec.cfo_sq_err = metrics::cfo_squared_error(cfo.omega_e, out.estimate.omega_hat);
    rec.rate_bits = metrics::rate_lower_bound(inst.h, out.estimate.h_hat, rec.snr_db);
    rec.gamp_iters = out.solver.diagnostics.iterations;
    rec.sigma1_ratio = out.estimate.sigma1_ratio;
  } catch (const gamp::Divergence& e) {
    rec.diverged = true;
    rec.gamp_iters = e.diagnostics().iterations;
  } catch (const DegenerateEstimate&) {
    rec.diverged = true;
  }
  if (rec.diverged) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.nmse_linear = rec.nmse_db = rec.cfo_sq_err = rec.rate_bits = rec.sigma1_ratio = nan;
  }
  if (cfg.record_runtime)
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct CellSummary {
  int n_p = 0;
  double snr_db = 0.0;
  int trials = 0;
  int diverged = 0;
  double mean_nmse_linear = 0.0;  // average of the norm ratio over non-diverged trials
  double mean_nmse_db = 0.0;      // 20 log10 of that average
  double cfo_mse = 0.0;
  double mean_rate_bits = 0.0;
  double mean_iters = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (n_p index, snr index, trial)
  std::vector<CellSummary> summary;

  const CellSummary& cell(int n_p, double snr_db) const {
    for (const auto& c : summary)
      if (c.n_p == n_p && c.snr_db == snr_db) return c;
    throw std::out_of_range("ExperimentResult::cell: no such cell");
  }
};

inline std::vector<CellSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  std::vector<CellSummary> out;
  for (std::size_t a = 0; a < cfg.n_p_list.size(); ++a) {
    for (std::size_t b = 0; b < cfg.snr_db_list.size(); ++b) {
      CellSummary c;
      c.n_p = cfg.n_p_list[a];
      c.snr_db = cfg.snr_db_list[b];
      int ok = 0;
      for (const auto& r : records) {
        if (r.n_p_index != a || r.snr_index != b) continue;
        ++c.trials;
        if (r.diverged) {
          ++c.diverged;
          continue;
        }
        ++ok;
        c.mean_nmse_linear += r.nmse_linear;
        c.cfo_mse += r.cfo_sq_err;
        c.mean_rate_bits += r.rate_bits;
        c.mean_iters += r.gamp_iters;
      }
      if (ok > 0) {
        c.mean_nmse_linear /= ok;
        c.cfo_mse /= ok;
        c.mean_rate_bits /= ok;
        c.mean_iters /= ok;
        c.mean_nmse_db = 20.0 * std::log10(c.mean_nmse_linear);
      } else {
        c.mean_nmse_linear = c.mean_nmse_db = c.cfo_mse = c.mean_rate_bits = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(c);
    }
  }
  return out;
}

/// Runs every (n_p, snr, trial) cell, on cfg.threads workers. Each record lands
/// in a slot fixed by its indices, so the output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_np = cfg.n_p_list.size();
  const std::size_t n_snr = cfg.snr_db_list.size();
  const auto n_trials = static_cast<std::size_t>(cfg.n_trials);
  const std::size_t total = n_np * n_snr * n_trials;

  ExperimentResult res;
  res.records.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t trial = k % n_trials;
      const std::size_t snr_i = (k / n_trials) % n_snr;
      const std::size_t np_i = k / (n_trials * n_snr);
      res.records[k] = run_trial(cfg, np_i, snr_i, trial);
    }
  };

  const auto n_workers = static_cast<std::size_t>(std::max(1, cfg.threads));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  res.summary = summarize(cfg, res.records);
  return res;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "snr_db,n_p,trial,seed,nmse_db,cfo_sq_err,rate_bits,gamp_iters,sigma1_ratio,runtime_ms,diverged";

inline std::string format_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

inline std::string format_csv(const std::vector<TrialRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += format_sci(r.snr_db) + ',' + std::to_string(r.n_p) + ',' + std::to_string(r.trial) + ',' +
           std::to_string(r.seed) + ',' + format_sci(r.nmse_db) + ',' + format_sci(r.cfo_sq_err) + ',' +
           format_sci(r.rate_bits) + ',' + std::to_string(r.gamp_iters) + ',' + format_sci(r.sigma1_ratio) + ',' +
           format_sci(r.runtime_ms) + ',' + (r.diverged ? "1" : "0") + '\n';
  }
  return out;
}

/// Writes the records as CSV. Nothing is created when records is empty.
inline void emit_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records to write");
  const std::string text = format_csv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

inline std::string format_summary(const std::vector<CellSummary>& cells) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%6s %8s %7s %5s %10s %12s %10s %8s\n", "n_p", "snr_db", "trials", "div",
                "nmse_db", "cfo_mse", "rate", "iters");
  out += buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%6d %8.2f %7d %5d %10.3f %12.4e %10.4f %8.1f\n", c.n_p, c.snr_db, c.trials,
                  c.diverged, c.mean_nmse_db, c.cfo_mse, c.mean_rate_bits, c.mean_iters);
    out += buf;
  }
  return out;
}

}  // namespace onebit::experiment

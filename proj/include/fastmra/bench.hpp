// Experiment harness comparing the fast estimator against EM.
//
// Each trial simulates a signal and an observation set, then runs
//   fast_mle   the single-pass estimator,
//   em_random  EM from a random spectrum drawn from the signal prior,
//   em_warm    EM initialized with that trial's fast_mle output,
// and records the aligned MSE and the wall time of each estimator call.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastmra/em.hpp"
#include "fastmra/fastmle.hpp"

namespace fastmra {

enum class Method { fast_mle, em_random, em_warm };

std::string_view method_name(Method method);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);

struct BenchConfig {
    int bandlimit = 5;
    int trials = 5;
    std::uint64_t seed_base = 0;

    std::vector<double> sigma_sweep;
    std::size_t n_fixed = 100000;

    std::vector<std::size_t> n_sweep;
    double sigma_fixed = 12.0;

    FastMleConfig fastmle;
    /// r_em, max_iters and tol are used; init is set per method.
    EmConfig em;
    std::size_t n_align = 10000;

    /// Estimators to run and record. em_warm still computes the fast
    /// estimate for its initialization when fast_mle is not listed.
    std::vector<Method> methods = {Method::fast_mle, Method::em_random, Method::em_warm};

    /// Run every estimator on one thread so timings are not skewed by contention.
    bool sequential_timing = false;
    /// Run each method once on a small instance before timing starts.
    bool warmup = true;

    std::filesystem::path output_path;
};

/// Reads a JSON config. Recognized keys: bandlimit, trials, seed_base,
/// sigma_sweep, n_fixed, n_sweep, sigma_fixed, r_mle, r_em, em_max_iters,
/// em_tol, n_align, threads, sequential_timing, warmup, output_path, methods.
/// Unknown keys are rejected.
BenchConfig load_bench_config(const std::filesystem::path& path);

struct BenchRecord {
    Method method = Method::fast_mle;
    double sigma = 0.0;
    std::size_t n = 0;
    int trial = 0;
    double mse = 0.0;
    double wall_time_seconds = 0.0;
    std::optional<int> em_iters;
    /// Estimator warnings; not written to CSV.
    std::vector<std::string> warnings;

    /// Compares every CSV column.
    bool same_row(const BenchRecord& other) const;
};

/// Seeds for one trial. The signal depends only on the trial index, so all
/// sweep points of a trial share one ground truth; the observations depend
/// on (sweep point, trial).
struct TrialSeeds {
    std::uint64_t signal;
    std::uint64_t observations;
    std::uint64_t em_init;
};
TrialSeeds sigma_trial_seeds(std::uint64_t seed_base, double sigma, int trial);
TrialSeeds n_trial_seeds(std::uint64_t seed_base, std::size_t n, int trial);

std::vector<BenchRecord> run_sigma_sweep(const BenchConfig& cfg);
std::vector<BenchRecord> run_n_sweep(const BenchConfig& cfg);

/// Orders by (method, sigma, n, trial).
void sort_records(std::vector<BenchRecord>& records);

inline constexpr std::string_view kCsvHeader = "method,sigma,n,trial,mse,wall_time_seconds,em_iters";

std::string to_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(std::string_view text);

/// Writes records sorted by sort_records. Throws std::runtime_error naming
/// the path on I/O failure.
void emit_csv(std::vector<BenchRecord> records, const std::filesystem::path& path);
std::vector<BenchRecord> read_csv(const std::filesystem::path& path);

struct SeriesSummary {
    Method method;
    double sigma;
    std::size_t n;
    int count;
    double mean_mse;
    double stderr_mse;
    double mean_seconds;
    double mean_em_iters;
};

/// Mean and standard error over trials for every (method, sigma, n).
std::vector<SeriesSummary> summarize(const std::vector<BenchRecord>& records);

} // namespace fastmra

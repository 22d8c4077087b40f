// Expectation-maximization for MRA over SO(2) with the rotation prior
// discretized to R equispaced angles.
//
// E-step: w_j(theta_r) proportional to exp(-|y_j - R_{theta_r} f|^2 / (2 sigma^2)),
//         evaluated in log space with per-row max subtraction.
// M-step: f[k] = (1/n) sum_j y_j[k] sum_r w_j(theta_r) e^{ik theta_r}.
//
// |.| is the norm over the full conjugate-symmetric spectrum, so each
// stored frequency k >= 1 counts twice (see frequency_multiplicity). This
// is the exact likelihood for the simulator's noise model.

#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fastmra/core.hpp"

namespace fastmra {

/// Start from random_signal(L, seed).
struct RandomInit {
    std::uint64_t seed = 0;
};

using EmInit = std::variant<RandomInit, SignalSpectrum>;

struct EmConfig {
    std::size_t r_em = 1000;
    int max_iters = 500;
    /// Stop when |f_new - f_old| / max(|f_old|, 1e-12) <= tol.
    double tol = 1e-6;
    EmInit init = RandomInit{};
    int threads = 0;
    /// Record the data log-likelihood of every iterate (slow; off for timing).
    bool audit_likelihood = false;

    void validate() const;
};

struct EmResult {
    SignalSpectrum estimate;
    int iters = 0;
    bool converged = false;
    /// Relative iterate change after each iteration.
    std::vector<double> trace;
    /// Filled when audit_likelihood is set: entry t is the log-likelihood of
    /// the iterate before iteration t+1, plus one final entry.
    std::vector<double> log_likelihood;
};

/// Dense n x R matrix of posterior weights, row-major.
class WeightMatrix {
public:
    WeightMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<double> row(std::size_t j) { return {data_.data() + j * cols_, cols_}; }
    std::span<const double> row(std::size_t j) const { return {data_.data() + j * cols_, cols_}; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Posterior rotation weights; every row sums to one.
WeightMatrix e_step(const ObservationSet& obs, const SignalSpectrum& current,
                    const RotationGrid& grid, int threads = 0);

/// Weighted average of the aligned observations. Im f[0] is set to zero.
SignalSpectrum m_step(const ObservationSet& obs, const WeightMatrix& weights,
                      const RotationGrid& grid, int threads = 0);

/// sum_j log( (1/R) sum_r exp(-|y_j - R_{theta_r} f|^2 / (2 sigma^2)) ), i.e. the
/// data log-likelihood up to the Gaussian normalization constant. The norm runs
/// over the full conjugate-symmetric spectrum (see frequency_multiplicity).
double log_likelihood(const ObservationSet& obs, const SignalSpectrum& current,
                      const RotationGrid& grid, int threads = 0);

/// Runs EM until the relative change drops to cfg.tol or cfg.max_iters
/// iterations have run. Non-convergence is reported in the result.
EmResult em_run(const ObservationSet& obs, const EmConfig& cfg);

} // namespace fastmra

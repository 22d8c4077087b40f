#include "fastmra/em.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fastmra/harmonics.hpp"
#include "fastmra/parallel.hpp"
#include "fastmra/simulate.hpp"

namespace fastmra {

namespace {

void check_inputs(const ObservationSet& obs, const SignalSpectrum& current) {
    if (current.bandlimit() != obs.bandlimit()) {
        throw std::invalid_argument("EM: estimate and observations differ in bandlimit");
    }
    if (!(obs.sigma() > 0.0)) {
        throw std::invalid_argument("EM requires sigma > 0");
    }
}

// Normalized posterior over the grid for one observation. Only the cross terms
// scale * Re(conj(y_k) f_k e^{-ik theta_r}), k >= 1, depend on r; |y|^2, |f|^2
// and the k = 0 term cancel in the normalization.
void posterior_row(std::span<const cplx> row, std::span<const cplx> current,
                   const HarmonicTable& table, double scale, std::span<double> weights) {
    std::fill(weights.begin(), weights.end(), 0.0);
    for (std::size_t k = 1; k < current.size(); ++k) {
        const cplx a = std::conj(row[k]) * current[k] * scale;
        const double ar = a.real();
        const double ai = a.imag();
        const auto c = table.cos_row(static_cast<int>(k));
        const auto s = table.sin_row(static_cast<int>(k));
        for (std::size_t r = 0; r < weights.size(); ++r) {
            weights[r] += ar * c[r] + ai * s[r];
        }
    }
    const double peak = *std::max_element(weights.begin(), weights.end());
    double total = 0.0;
    for (double& w : weights) {
        w = std::exp(w - peak);
        total += w;
    }
    const double inv_total = 1.0 / total;
    for (double& w : weights) {
        w *= inv_total;
    }
}

// acc[k] += y_k sum_r w_r e^{ik theta_r}
void accumulate_aligned(std::span<const cplx> row, std::span<const double> weights,
                        const HarmonicTable& table, std::span<cplx> acc) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        const auto c = table.cos_row(static_cast<int>(k));
        const auto s = table.sin_row(static_cast<int>(k));
        double re = 0.0;
        double im = 0.0;
#pragma omp simd reduction(+ : re, im)
        for (std::size_t r = 0; r < weights.size(); ++r) {
            re += weights[r] * c[r];
            im += weights[r] * s[r];
        }
        acc[k] += row[k] * cplx(re, im);
    }
}

SignalSpectrum finish_average(std::vector<cplx> total, std::size_t n) {
    for (cplx& c : total) {
        c /= static_cast<double>(n);
    }
    total[0].imag(0.0);
    return SignalSpectrum(std::move(total));
}

template <class RowWeights>
SignalSpectrum reduce_aligned(const ObservationSet& obs, const HarmonicTable& table, int threads,
                              RowWeights&& row_weights) {
    const std::size_t width = obs.stride();
    const std::size_t chunks = chunk_count(obs.size());
    std::vector<std::vector<cplx>> partial(chunks);
    for_each_chunk(obs.size(), threads, [&](ChunkRange chunk) {
        std::vector<cplx> acc(width);
        std::vector<double> scratch(table.grid_size());
        for (std::size_t j = chunk.begin; j < chunk.end; ++j) {
            accumulate_aligned(obs.row(j), row_weights(j, scratch), table, acc);
        }
        partial[chunk.index] = std::move(acc);
    });
    std::vector<cplx> total(width);
    for (const auto& acc : partial) {
        for (std::size_t k = 0; k < width; ++k) {
            total[k] += acc[k];
        }
    }
    return finish_average(std::move(total), obs.size());
}

double relative_change(const SignalSpectrum& next, const SignalSpectrum& prev) {
    double diff = 0.0;
    for (std::size_t k = 0; k < next.coeffs().size(); ++k) {
        diff += std::norm(next[k] - prev[k]);
    }
    return std::sqrt(diff) / std::max(std::sqrt(spectrum_norm_sq(prev)), 1e-12);
}

} // namespace

void EmConfig::validate() const {
    if (r_em < 2) {
        throw std::invalid_argument("EmConfig: r_em must be >= 2");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("EmConfig: max_iters must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("EmConfig: tol must be > 0");
    }
}

WeightMatrix e_step(const ObservationSet& obs, const SignalSpectrum& current,
                    const RotationGrid& grid, int threads) {
    check_inputs(obs, current);
    const HarmonicTable table(grid, obs.bandlimit());
    const double scale = cross_term_scale(obs.sigma());
    WeightMatrix weights(obs.size(), grid.size());
    for_each_chunk(obs.size(), threads, [&](ChunkRange chunk) {
        for (std::size_t j = chunk.begin; j < chunk.end; ++j) {
            posterior_row(obs.row(j), current.coeffs(), table, scale, weights.row(j));
        }
    });
    return weights;
}

SignalSpectrum m_step(const ObservationSet& obs, const WeightMatrix& weights,
                      const RotationGrid& grid, int threads) {
    if (weights.rows() != obs.size() || weights.cols() != grid.size()) {
        throw std::invalid_argument("m_step: weight matrix shape does not match n x R");
    }
    const HarmonicTable table(grid, obs.bandlimit());
    return reduce_aligned(obs, table, threads,
                          [&](std::size_t j, std::vector<double>&) { return weights.row(j); });
}

double log_likelihood(const ObservationSet& obs, const SignalSpectrum& current,
                      const RotationGrid& grid, int threads) {
    check_inputs(obs, current);
    const double inv_two_var = 0.5 / (obs.sigma() * obs.sigma());
    const double log_r = std::log(static_cast<double>(grid.size()));
    const std::size_t width = obs.stride();

    // rotated[r * width + k] = f[k] e^{-ik theta_r}
    std::vector<cplx> rotated(grid.size() * width);
    for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t k = 0; k < width; ++k) {
            rotated[r * width + k] = current[k] * std::polar(1.0, -static_cast<double>(k) * grid[r]);
        }
    }

    const std::size_t chunks = chunk_count(obs.size());
    std::vector<double> partial(chunks);
    for_each_chunk(obs.size(), threads, [&](ChunkRange chunk) {
        std::vector<double> exponent(grid.size());
        double sum = 0.0;
        for (std::size_t j = chunk.begin; j < chunk.end; ++j) {
            const auto row = obs.row(j);
            for (std::size_t r = 0; r < grid.size(); ++r) {
                double residual = 0.0;
                for (std::size_t k = 0; k < width; ++k) {
                    residual += frequency_multiplicity(static_cast<int>(k)) *
                                std::norm(row[k] - rotated[r * width + k]);
                }
                exponent[r] = -residual * inv_two_var;
            }
            const double peak = *std::max_element(exponent.begin(), exponent.end());
            double total = 0.0;
            for (double e : exponent) {
                total += std::exp(e - peak);
            }
            sum += peak + std::log(total) - log_r;
        }
        partial[chunk.index] = sum;
    });
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

EmResult em_run(const ObservationSet& obs, const EmConfig& cfg) {
    cfg.validate();
    const int L = obs.bandlimit();
    SignalSpectrum current =
        std::holds_alternative<RandomInit>(cfg.init)
            ? random_signal(L, std::get<RandomInit>(cfg.init).seed)
            : std::get<SignalSpectrum>(cfg.init);
    check_inputs(obs, current);

    const RotationGrid grid(cfg.r_em);
    const HarmonicTable table(grid, L);
    const double scale = cross_term_scale(obs.sigma());

    EmResult result{current, 0, false, {}, {}};
    for (int t = 0; t < cfg.max_iters; ++t) {
        if (cfg.audit_likelihood) {
            result.log_likelihood.push_back(log_likelihood(obs, current, grid, cfg.threads));
        }
        // E and M steps fused per observation so the n x R matrix is never stored.
        SignalSpectrum next = reduce_aligned(
            obs, table, cfg.threads, [&](std::size_t j, std::vector<double>& scratch) {
                posterior_row(obs.row(j), current.coeffs(), table, scale, scratch);
                return std::span<const double>(scratch);
            });
        const double change = relative_change(next, current);
        result.trace.push_back(change);
        result.iters = t + 1;
        current = std::move(next);
        if (change <= cfg.tol) {
            result.converged = true;
            break;
        }
    }
    if (cfg.audit_likelihood) {
        result.log_likelihood.push_back(log_likelihood(obs, current, grid, cfg.threads));
    }
    result.estimate = std::move(current);
    return result;
}

} // namespace fastmra

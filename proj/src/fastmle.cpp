#include "fastmra/fastmle.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "fastmra/harmonics.hpp"
#include "fastmra/parallel.hpp"

namespace fastmra {

namespace {

using ReadCounts = std::vector<std::uint64_t>;

void check_frequency(int k, int bandlimit, int lowest) {
    if (k < lowest || k > bandlimit) {
        throw std::out_of_range("frequency " + std::to_string(k) + " outside [" +
                                std::to_string(lowest) + ", " + std::to_string(bandlimit) + "]");
    }
}

void warn(FastMleDiagnostics* diagnostics, std::string message) {
    std::clog << "[fastmra] warning: " << message << '\n';
    if (diagnostics != nullptr) {
        diagnostics->warnings.push_back(std::move(message));
    }
}

// out[r] = C_{j,k}(theta_r) using frequencies k' in 1..highest, k' != k.
// The work done does not depend on the values in `current`.
void fill_log_values(std::span<const cplx> row, double scale,
                     std::span<const cplx> current, int k, int highest, const HarmonicTable& table,
                     std::span<double> out, ReadCounts* reads) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int kp = 1; kp <= highest; ++kp) {
        if (kp == k) {
            continue;
        }
        const cplx a = std::conj(row[static_cast<std::size_t>(kp)]) *
                       current[static_cast<std::size_t>(kp)] * scale;
        if (reads != nullptr) {
            ++(*reads)[static_cast<std::size_t>(kp)];
        }
        // Re(a e^{-i kp theta}) = Re(a) cos(kp theta) + Im(a) sin(kp theta)
        const auto c = table.cos_row(kp);
        const auto s = table.sin_row(kp);
        const double ar = a.real();
        const double ai = a.imag();
        for (std::size_t r = 0; r < out.size(); ++r) {
            out[r] += ar * c[r] + ai * s[r];
        }
    }
}

// weights[r] = exp(C_r - max C). Returns false when C is constant, in which
// case every weight is exactly 1 and all nonzero harmonics vanish.
bool exponentiate(std::span<const double> log_values, std::span<double> weights) {
    const auto [low, high] = std::minmax_element(log_values.begin(), log_values.end());
    const double peak = *high;
    for (std::size_t r = 0; r < log_values.size(); ++r) {
        weights[r] = std::exp(log_values[r] - peak);
    }
    return *low != *high;
}

// (2*pi/R) sum_r w_r e^{-i m theta_r}
cplx harmonic(std::span<const double> weights, const HarmonicTable& table, int m) {
    const auto c = table.cos_row(m);
    const auto s = table.sin_row(m);
    double re = 0.0;
    double im = 0.0;
#pragma omp simd reduction(+ : re, im)
    for (std::size_t r = 0; r < weights.size(); ++r) {
        re += weights[r] * c[r];
        im -= weights[r] * s[r];
    }
    const double scale = kTwoPi / static_cast<double>(weights.size());
    return {re * scale, im * scale};
}

cplx accumulate_term(cplx y_k, cplx c0, cplx ck) {
    if (!(c0.real() > 0.0) || !std::isfinite(c0.real())) {
        throw PositivityViolation("kernel zeroth coefficient is not strictly positive: " +
                                  std::to_string(c0.real()));
    }
    return y_k * std::conj(ck) / c0.real();
}

// Z for frequency k. The per-chunk partial sums are combined in chunk order.
cplx accumulate_z(const ObservationSet& obs, std::span<const cplx> current, int k, int highest,
                  const HarmonicTable& table, int threads, ReadCounts* reads) {
    const double scale = cross_term_scale(obs.sigma());
    const std::size_t chunks = chunk_count(obs.size());
    std::vector<cplx> partial(chunks);
    std::vector<ReadCounts> partial_reads(reads != nullptr ? chunks : 0);

    for_each_chunk(obs.size(), threads, [&](ChunkRange chunk) {
        std::vector<double> log_values(table.grid_size());
        std::vector<double> weights(table.grid_size());
        ReadCounts* local_reads = nullptr;
        if (reads != nullptr) {
            partial_reads[chunk.index].assign(reads->size(), 0);
            local_reads = &partial_reads[chunk.index];
        }
        cplx z{};
        for (std::size_t j = chunk.begin; j < chunk.end; ++j) {
            const auto row = obs.row(j);
            fill_log_values(row, scale, current, k, highest, table, log_values, local_reads);
            const bool varying = exponentiate(log_values, weights);
            if (local_reads != nullptr) {
                ++(*local_reads)[static_cast<std::size_t>(k)];
            }
            const cplx ck = varying ? harmonic(weights, table, k) : cplx{};
            z += accumulate_term(row[static_cast<std::size_t>(k)], harmonic(weights, table, 0), ck);
        }
        partial[chunk.index] = z;
    });

    cplx z{};
    for (std::size_t c = 0; c < chunks; ++c) {
        z += partial[c];
        if (reads != nullptr) {
            for (std::size_t m = 0; m < reads->size(); ++m) {
                (*reads)[m] += partial_reads[c][m];
            }
        }
    }
    return z;
}

cplx unit_phase(cplx z) {
    const double magnitude = std::abs(z);
    if (!(magnitude >= 1e-300)) {
        throw DegeneratePhaseError("phase accumulator vanished (|Z| = " +
                                   std::to_string(magnitude) + ")");
    }
    return z / magnitude;
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("the alignment kernel requires sigma > 0");
    }
}

} // namespace

void FastMleConfig::validate(int bandlimit) const {
    if (r_mle < static_cast<std::size_t>(2 * bandlimit + 1)) {
        throw std::invalid_argument("r_mle = " + std::to_string(r_mle) + " is below 2L+1 = " +
                                    std::to_string(2 * bandlimit + 1));
    }
}

double estimate_dc(const ObservationSet& obs) {
    double total = 0.0;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        total += obs.row(j)[0].real();
    }
    return total / static_cast<double>(obs.size());
}

std::vector<double> estimate_magnitudes(const ObservationSet& obs) {
    const int L = obs.bandlimit();
    std::vector<double> second_moment(static_cast<std::size_t>(L), 0.0);
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const auto row = obs.row(j);
        for (int k = 1; k <= L; ++k) {
            second_moment[static_cast<std::size_t>(k - 1)] += std::norm(row[static_cast<std::size_t>(k)]);
        }
    }
    const double noise_power = obs.sigma() * obs.sigma();
    std::vector<double> magnitudes(second_moment.size());
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        const double debiased = second_moment[i] / static_cast<double>(obs.size()) - noise_power;
        magnitudes[i] = std::sqrt(std::max(0.0, debiased));
    }
    return magnitudes;
}

std::vector<double> kernel_log_values(std::span<const cplx> row, double sigma,
                                      const SignalSpectrum& current, int k,
                                      const RotationGrid& grid) {
    const int L = current.bandlimit();
    check_frequency(k, L, 1);
    check_sigma(sigma);
    if (row.size() != current.coeffs().size()) {
        throw std::invalid_argument("observation row length does not match bandlimit");
    }
    const HarmonicTable table(grid, L);
    std::vector<double> out(grid.size());
    fill_log_values(row, cross_term_scale(sigma), current.coeffs(), k, L, table, out, nullptr);
    return out;
}

KernelSpectrum kernel_transform(std::span<const double> log_values, int k) {
    if (k < 1) {
        throw std::out_of_range("kernel_transform: k must be >= 1");
    }
    if (log_values.empty()) {
        throw std::invalid_argument("kernel_transform: empty log values");
    }
    const HarmonicTable table(RotationGrid(log_values.size()), k);
    std::vector<double> weights(log_values.size());
    const bool varying = exponentiate(log_values, weights);
    KernelSpectrum kernel;
    kernel.values.resize(static_cast<std::size_t>(k) + 1);
    kernel.values[0] = harmonic(weights, table, 0);
    for (int m = 1; m <= k && varying; ++m) {
        kernel.values[static_cast<std::size_t>(m)] = harmonic(weights, table, m);
    }
    return kernel;
}

cplx phase_term(cplx y_k, const KernelSpectrum& kernel) {
    if (kernel.values.size() < 2) {
        throw std::invalid_argument("phase_term: kernel needs coefficients 0..k with k >= 1");
    }
    return accumulate_term(y_k, kernel.values.front(), kernel.values.back());
}

cplx phase_update(const ObservationSet& obs, const SignalSpectrum& current, int k,
                  const FastMleConfig& cfg) {
    const int L = obs.bandlimit();
    if (current.bandlimit() != L) {
        throw std::invalid_argument("phase_update: estimate and observations differ in bandlimit");
    }
    check_frequency(k, L, 2);
    check_sigma(obs.sigma());
    cfg.validate(L);
    const HarmonicTable table(RotationGrid(cfg.r_mle), L);
    return unit_phase(accumulate_z(obs, current.coeffs(), k, L, table, cfg.threads, nullptr));
}

SignalSpectrum fast_mle(const ObservationSet& obs, const FastMleConfig& cfg,
                        FastMleDiagnostics* diagnostics) {
    const int L = obs.bandlimit();
    cfg.validate(L);
    const std::size_t width = static_cast<std::size_t>(L) + 1;
    ReadCounts* reads = nullptr;
    if (diagnostics != nullptr) {
        diagnostics->column_reads.assign(width, 0);
        reads = &diagnostics->column_reads;
        // The preliminary estimates read every entry once.
        for (auto& count : *reads) {
            count += obs.size();
        }
    }

    const std::vector<double> magnitudes = estimate_magnitudes(obs);
    std::vector<cplx> coeffs(width);
    coeffs[0] = estimate_dc(obs);
    coeffs[1] = magnitudes[0];

    const bool anchored = magnitudes[0] != 0.0;
    if (!anchored) {
        warn(diagnostics, "estimated |f[1]| is zero; returning the magnitudes with zero phases");
    }
    if (L >= 2) {
        check_sigma(obs.sigma());
    }

    const HarmonicTable table(RotationGrid(cfg.r_mle), L);
    // Every step runs in full even when a magnitude or the anchor is zero, so
    // the work and the entries read do not depend on the data. Without an
    // anchor the marched phases are discarded afterwards.
    for (int k = 2; k <= L; ++k) {
        const double magnitude = magnitudes[static_cast<std::size_t>(k - 1)];
        cplx phase{1.0, 0.0};
        try {
            phase = unit_phase(accumulate_z(obs, coeffs, k, k - 1, table, cfg.threads, reads));
        } catch (const DegeneratePhaseError& e) {
            if (anchored) {
                warn(diagnostics, "frequency " + std::to_string(k) + ": " + e.what() + "; using phase 1");
            }
        }
        coeffs[static_cast<std::size_t>(k)] = magnitude * phase;
    }
    if (!anchored) {
        for (int k = 2; k <= L; ++k) {
            coeffs[static_cast<std::size_t>(k)] = magnitudes[static_cast<std::size_t>(k - 1)];
        }
    }
    return SignalSpectrum(std::move(coeffs));
}

} // namespace fastmra

// Single-pass low-SNR maximum-likelihood estimator for MRA over SO(2).
//
// The estimator fixes the phase of f[1] to zero and then marches upward in
// frequency. At step k every observation j contributes a data-driven
// alignment kernel
//
//   C_{j,k}(theta) = sigma^{-2} sum_{k' != +-k} Re( conj(y_j[k']) f[k'] e^{-ik'theta} ),
//
// with k' running over the full spectrum -L..L. Stored one-sided this is
// 2 sigma^{-2} sum over k' in 1..L, k' != k (cross_term_scale). The kernel
// is built from the already estimated lower frequencies, and the phase of
// f[k] is the direction of
//
//   Z = sum_j y_j[k] conj(Chat_{j,k}[k]) / Chat_{j,k}[0],
//
// where Chat_{j,k}[m] is the m-th Fourier coefficient of exp(C_{j,k}).
// Magnitudes come from the debiased second moment of each frequency.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastmra/core.hpp"

namespace fastmra {

struct FastMleConfig {
    /// Quadrature grid size for the kernel transform.
    std::size_t r_mle = 500;
    /// Worker threads; 0 uses every core. Results do not depend on it.
    int threads = 0;

    /// Throws std::invalid_argument unless r_mle >= 2L+1.
    void validate(int bandlimit) const;
};

/// Values proportional to Chat_{j,k}[m] for m = 0..k. All entries share one
/// positive, per-observation scale factor, which cancels in the phase update.
struct KernelSpectrum {
    std::vector<cplx> values;
};

/// Thrown when the phase accumulator Z vanishes.
class DegeneratePhaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a kernel's zeroth coefficient is not strictly positive.
/// exp(C) > 0 everywhere, so this indicates overflow or a logic error.
class PositivityViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Mean of Re y_j[0].
double estimate_dc(const ObservationSet& obs);

/// sqrt(max(0, mean_j |y_j[k]|^2 - sigma^2)) for k = 1..L; element k-1
/// holds frequency k.
std::vector<double> estimate_magnitudes(const ObservationSet& obs);

/// C_{j,k}(theta_r) on every grid angle: cross_term_scale(sigma) times the
/// sum over k' in {1..L} \ {k}.
/// The k' = 0 term is constant in theta and omitted. Throws
/// std::out_of_range unless 1 <= k <= L, std::invalid_argument if sigma <= 0.
std::vector<double> kernel_log_values(std::span<const cplx> row, double sigma,
                                      const SignalSpectrum& current, int k,
                                      const RotationGrid& grid);

/// Fourier coefficients m = 0..k of exp(C) sampled on the equispaced grid
/// implied by log_values.size(). The maximum of C is subtracted before
/// exponentiating.
KernelSpectrum kernel_transform(std::span<const double> log_values, int k);

/// One observation's contribution y_k conj(Chat[k]) / Chat[0] to Z. Throws
/// PositivityViolation if Chat[0] is not strictly positive and finite.
cplx phase_term(cplx y_k, const KernelSpectrum& kernel);

/// Unit-modulus phase Z/|Z| for frequency k in [2, L]. Throws
/// DegeneratePhaseError when |Z| < 1e-300.
cplx phase_update(const ObservationSet& obs, const SignalSpectrum& current, int k,
                  const FastMleConfig& cfg);

struct FastMleDiagnostics {
    std::vector<std::string> warnings;
    /// Number of reads of y_j[k] summed over j, indexed by k.
    std::vector<std::uint64_t> column_reads;
};

/// Full frequency-marching estimate. Step k builds its kernels from the
/// frequencies 1..k-1 estimated so far. Degenerate phases fall back to 1
/// with a warning. If the estimated |f[1]| is zero there is no anchor: the
/// result is the magnitudes with all phases zero, plus one warning. Every
/// step runs regardless, so the work done does not depend on the data.
SignalSpectrum fast_mle(const ObservationSet& obs, const FastMleConfig& cfg,
                        FastMleDiagnostics* diagnostics = nullptr);

} // namespace fastmra

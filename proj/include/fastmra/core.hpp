// Domain types for multi-reference alignment over SO(2).
//
// Signals are real and bandlimited, so only the one-sided spectrum
// f[0], f[1], ..., f[L] is stored; negative frequencies follow from
// conjugate symmetry. Every type here is immutable after construction.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fastmra {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// One-sided Fourier coefficients f[0..L] of a real bandlimited signal.
/// f[0] always has an exactly zero imaginary part.
class SignalSpectrum {
public:
    /// All-zero spectrum with bandlimit L >= 1.
    explicit SignalSpectrum(int bandlimit);

    /// Takes ownership of coeffs (length L+1, L >= 1). Throws
    /// std::invalid_argument if coeffs[0] has a nonzero imaginary part.
    explicit SignalSpectrum(std::vector<cplx> coeffs);

    int bandlimit() const { return static_cast<int>(coeffs_.size()) - 1; }
    std::span<const cplx> coeffs() const { return coeffs_; }
    const cplx& operator[](std::size_t k) const { return coeffs_[k]; }

    bool operator==(const SignalSpectrum&) const = default;

private:
    std::vector<cplx> coeffs_;
};

/// n noisy rotated observations in the Fourier domain, stored row-major
/// as n rows of L+1 coefficients.
class ObservationSet {
public:
    ObservationSet(int bandlimit, double sigma, std::vector<cplx> data);

    int bandlimit() const { return bandlimit_; }
    std::size_t size() const { return n_; }
    double sigma() const { return sigma_; }

    std::span<const cplx> row(std::size_t j) const {
        return {data_.data() + j * stride(), stride()};
    }
    std::span<const cplx> data() const { return data_; }
    std::size_t stride() const { return static_cast<std::size_t>(bandlimit_) + 1; }

    bool operator==(const ObservationSet&) const = default;

private:
    int bandlimit_;
    std::size_t n_;
    double sigma_;
    std::vector<cplx> data_;
};

/// R equispaced angles 2*pi*r/R on [0, 2*pi).
class RotationGrid {
public:
    explicit RotationGrid(std::size_t size);

    std::size_t size() const { return angles_.size(); }
    double spacing() const { return kTwoPi / static_cast<double>(angles_.size()); }
    std::span<const double> angles() const { return angles_; }
    double operator[](std::size_t r) const { return angles_[r]; }

private:
    std::vector<double> angles_;
};

/// Number of times frequency k appears in the full conjugate-symmetric
/// spectrum: once for k = 0, twice (as k and -k) otherwise. The Gaussian
/// log-likelihood of one observation given a rotated spectrum g is
///   -(1/(2 sigma^2)) sum_k frequency_multiplicity(k) |y[k] - g[k]|^2,
/// which is exact for the simulator's noise (real N(0, sigma^2) at k = 0,
/// complex with E|e|^2 = sigma^2 for k >= 1).
constexpr double frequency_multiplicity(int k) { return k == 0 ? 1.0 : 2.0; }

/// Scale of the rotation-dependent cross terms Re(conj(y[k]) f[k] e^{-ik theta})
/// for k >= 1 in that log-likelihood, 2 / (2 sigma^2) = 1 / sigma^2 per side.
inline double cross_term_scale(double sigma) { return frequency_multiplicity(1) / (sigma * sigma); }

/// f[k] for any signed k in [-L, L]; negative k returns conj(f[-k]).
/// Throws std::out_of_range when |k| > L.
cplx signed_coefficient(const SignalSpectrum& spec, int k);

/// Sum of |f[k]|^2 over k = 0..L (one-sided).
double spectrum_norm_sq(const SignalSpectrum& spec);

/// Evaluates f(t) = sum_{k=-L}^{L} f[k] e^{ikt}. The result is complex so
/// callers can check that the imaginary part vanishes.
cplx evaluate(const SignalSpectrum& spec, double t);

} // namespace fastmra

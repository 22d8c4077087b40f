#include "fastmra/core.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace fastmra {

SignalSpectrum::SignalSpectrum(int bandlimit) {
    if (bandlimit < 1) {
        throw std::invalid_argument("bandlimit must be >= 1, got " + std::to_string(bandlimit));
    }
    coeffs_.assign(static_cast<std::size_t>(bandlimit) + 1, cplx{});
}

SignalSpectrum::SignalSpectrum(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) {
        throw std::invalid_argument("spectrum needs at least two coefficients (L >= 1)");
    }
    if (coeffs_[0].imag() != 0.0) {
        throw std::invalid_argument("f[0] of a real signal must have zero imaginary part");
    }
}

ObservationSet::ObservationSet(int bandlimit, double sigma, std::vector<cplx> data)
    : bandlimit_(bandlimit), n_(0), sigma_(sigma), data_(std::move(data)) {
    if (bandlimit_ < 1) {
        throw std::invalid_argument("bandlimit must be >= 1");
    }
    if (!(sigma_ >= 0.0)) {
        throw std::invalid_argument("sigma must be nonnegative");
    }
    if (data_.empty() || data_.size() % stride() != 0) {
        throw std::invalid_argument("observation data must hold n >= 1 rows of L+1 coefficients");
    }
    n_ = data_.size() / stride();
}

RotationGrid::RotationGrid(std::size_t size) {
    if (size == 0) {
        throw std::invalid_argument("rotation grid needs at least one point");
    }
    angles_.resize(size);
    for (std::size_t r = 0; r < size; ++r) {
        angles_[r] = kTwoPi * static_cast<double>(r) / static_cast<double>(size);
    }
}

cplx signed_coefficient(const SignalSpectrum& spec, int k) {
    const int L = spec.bandlimit();
    if (k < -L || k > L) {
        throw std::out_of_range("frequency " + std::to_string(k) + " outside [-" +
                                std::to_string(L) + ", " + std::to_string(L) + "]");
    }
    return k >= 0 ? spec[static_cast<std::size_t>(k)] : std::conj(spec[static_cast<std::size_t>(-k)]);
}

double spectrum_norm_sq(const SignalSpectrum& spec) {
    double total = 0.0;
    for (const cplx& c : spec.coeffs()) {
        total += std::norm(c);
    }
    return total;
}

cplx evaluate(const SignalSpectrum& spec, double t) {
    const int L = spec.bandlimit();
    cplx value{};
    for (int k = -L; k <= L; ++k) {
        value += signed_coefficient(spec, k) * std::polar(1.0, k * t);
    }
    return value;
}

} // namespace fastmra

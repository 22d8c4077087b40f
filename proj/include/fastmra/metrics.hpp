#pragma once

#include <cstddef>

#include "fastmra/core.hpp"

namespace fastmra {

struct AlignedError {
    double mse;
    double alpha_star;
};

/// Aligns the estimate to the truth by sweeping alpha over n_align
/// equispaced angles, minimizing sum_k |est[k] e^{-ik alpha} - truth[k]|^2,
/// then reports sum_k |est[k] e^{-ik alpha*} - truth[k]|^2 / |truth[k]|^2.
///
/// The sweep keeps the first minimizer. Throws std::invalid_argument on a
/// bandlimit mismatch or n_align == 0, std::domain_error if any truth
/// coefficient is zero.
AlignedError align_and_mse(const SignalSpectrum& estimate, const SignalSpectrum& truth,
                           std::size_t n_align = 10000);

} // namespace fastmra

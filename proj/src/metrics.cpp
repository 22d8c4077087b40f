#include "fastmra/metrics.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace fastmra {

AlignedError align_and_mse(const SignalSpectrum& estimate, const SignalSpectrum& truth,
                           std::size_t n_align) {
    if (estimate.bandlimit() != truth.bandlimit()) {
        throw std::invalid_argument("align_and_mse: bandlimits differ");
    }
    if (n_align == 0) {
        throw std::invalid_argument("align_and_mse: n_align must be positive");
    }
    const std::size_t width = truth.coeffs().size();
    for (std::size_t k = 0; k < width; ++k) {
        if (truth[k] == cplx{}) {
            throw std::domain_error("align_and_mse: truth coefficient " + std::to_string(k) +
                                    " is zero, relative error undefined");
        }
    }

    const RotationGrid shifts(n_align);
    double best = std::numeric_limits<double>::infinity();
    double alpha_star = 0.0;
    for (std::size_t a = 0; a < n_align; ++a) {
        double distance = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            distance += std::norm(estimate[k] * std::polar(1.0, -static_cast<double>(k) * shifts[a]) -
                                  truth[k]);
        }
        if (distance < best) {
            best = distance;
            alpha_star = shifts[a];
        }
    }

    double mse = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
        mse += std::norm(estimate[k] * std::polar(1.0, -static_cast<double>(k) * alpha_star) - truth[k]) /
               std::norm(truth[k]);
    }
    return {mse, alpha_star};
}

} // namespace fastmra

#include "fastmra/harmonics.hpp"

#include <cmath>
#include <stdexcept>

namespace fastmra {

HarmonicTable::HarmonicTable(const RotationGrid& grid, int max_harmonic)
    : grid_size_(grid.size()), max_harmonic_(max_harmonic) {
    if (max_harmonic < 0) {
        throw std::invalid_argument("max_harmonic must be nonnegative");
    }
    const std::size_t rows = static_cast<std::size_t>(max_harmonic) + 1;
    cos_.resize(rows * grid_size_);
    sin_.resize(rows * grid_size_);
    for (std::size_t m = 0; m < rows; ++m) {
        for (std::size_t r = 0; r < grid_size_; ++r) {
            // Reduce m*r modulo R first so the argument stays in [0, 2*pi).
            const std::size_t turn = (m * r) % grid_size_;
            const double angle = kTwoPi * static_cast<double>(turn) / static_cast<double>(grid_size_);
            cos_[m * grid_size_ + r] = std::cos(angle);
            sin_[m * grid_size_ + r] = std::sin(angle);
        }
    }
}

} // namespace fastmra

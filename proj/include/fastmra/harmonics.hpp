#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fastmra/core.hpp"

namespace fastmra {

/// Precomputed cos(m*theta_r) and sin(m*theta_r) for m = 0..max_harmonic
/// over a rotation grid. Shared by the kernel transform and the EM steps.
class HarmonicTable {
public:
    HarmonicTable(const RotationGrid& grid, int max_harmonic);

    std::size_t grid_size() const { return grid_size_; }
    int max_harmonic() const { return max_harmonic_; }

    std::span<const double> cos_row(int m) const {
        return {cos_.data() + static_cast<std::size_t>(m) * grid_size_, grid_size_};
    }
    std::span<const double> sin_row(int m) const {
        return {sin_.data() + static_cast<std::size_t>(m) * grid_size_, grid_size_};
    }

private:
    std::size_t grid_size_;
    int max_harmonic_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

} // namespace fastmra

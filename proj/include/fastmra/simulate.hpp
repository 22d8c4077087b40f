// Synthetic signals and observations for the SO(2) MRA model
//
//   y_j[k] = f[k] e^{-ik theta_j} + eps_j[k],  theta_j ~ Unif[0, 2*pi).
//
// Noise has total variance sigma^2 per complex coefficient (real and
// imaginary parts each sigma^2/2) for k >= 1, and is real N(0, sigma^2) at
// k = 0 where the spectrum of a real signal is real.
//
// Random numbers come from std::mt19937_64. Every observation j draws from
// its own engine seeded with splitmix64(seed, j), so the output does not
// depend on how generation is scheduled across threads.

#pragma once

#include <cstdint>
#include <filesystem>

#include "fastmra/core.hpp"

namespace fastmra {

struct SimConfig {
    int bandlimit = 5;
    std::size_t n = 1;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int threads = 0;

    /// Throws std::invalid_argument when L < 1, n < 1 or sigma < 0.
    void validate() const;
};

/// splitmix64 finalizer applied to a ^ (b * golden ratio); used to derive
/// independent substream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// f[0] real standard normal; Re and Im of f[1..L] i.i.d. standard normal.
SignalSpectrum random_signal(int bandlimit, std::uint64_t seed);

/// Coefficients f[k] e^{-ik theta}.
SignalSpectrum rotate_spectrum(const SignalSpectrum& spec, double theta);

/// Throws std::invalid_argument if cfg.bandlimit differs from the spectrum's.
ObservationSet generate_observations(const SignalSpectrum& spec, const SimConfig& cfg);

// Binary observation file, all fields little-endian:
//   bytes 0..7   magic "FMRAOBS1"
//   int64        L
//   int64        n
//   float64      sigma
//   n * (L+1) * 2 float64, row-major, interleaved (Re, Im)
void write_observations(const std::filesystem::path& path, const ObservationSet& obs);
ObservationSet read_observations(const std::filesystem::path& path);

} // namespace fastmra

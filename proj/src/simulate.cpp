#include "fastmra/simulate.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "fastmra/parallel.hpp"

namespace fastmra {

static_assert(std::endian::native == std::endian::little,
              "observation file I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'M', 'R', 'A', 'O', 'B', 'S', '1'};

template <class T>
void put(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw std::runtime_error("truncated observation file: " + path.string());
    }
    return value;
}

} // namespace

void SimConfig::validate() const {
    if (bandlimit < 1) {
        throw std::invalid_argument("SimConfig: bandlimit must be >= 1");
    }
    if (n < 1) {
        throw std::invalid_argument("SimConfig: n must be >= 1");
    }
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("SimConfig: sigma must be >= 0");
    }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b * 0x9E3779B97F4A7C15ULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SignalSpectrum random_signal(int bandlimit, std::uint64_t seed) {
    if (bandlimit < 1) {
        throw std::invalid_argument("random_signal: bandlimit must be >= 1");
    }
    std::mt19937_64 engine(mix_seed(seed, 0x5167ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cplx> coeffs(static_cast<std::size_t>(bandlimit) + 1);
    coeffs[0] = normal(engine);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        const double re = normal(engine);
        const double im = normal(engine);
        coeffs[k] = {re, im};
    }
    return SignalSpectrum(std::move(coeffs));
}

SignalSpectrum rotate_spectrum(const SignalSpectrum& spec, double theta) {
    std::vector<cplx> coeffs(spec.coeffs().begin(), spec.coeffs().end());
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        coeffs[k] *= std::polar(1.0, -static_cast<double>(k) * theta);
    }
    return SignalSpectrum(std::move(coeffs));
}

ObservationSet generate_observations(const SignalSpectrum& spec, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.bandlimit != spec.bandlimit()) {
        throw std::invalid_argument("generate_observations: config bandlimit " +
                                    std::to_string(cfg.bandlimit) + " != signal bandlimit " +
                                    std::to_string(spec.bandlimit()));
    }
    const std::size_t stride = static_cast<std::size_t>(cfg.bandlimit) + 1;
    std::vector<cplx> data(cfg.n * stride);
    const double complex_sd = cfg.sigma / std::sqrt(2.0);

    for_each_chunk(cfg.n, cfg.threads, [&](ChunkRange chunk) {
        for (std::size_t j = chunk.begin; j < chunk.end; ++j) {
            std::mt19937_64 engine(mix_seed(cfg.seed, j + 1));
            std::uniform_real_distribution<double> angle(0.0, kTwoPi);
            std::normal_distribution<double> normal(0.0, 1.0);
            const double theta = angle(engine);
            cplx* row = data.data() + j * stride;
            row[0] = cplx(spec[0].real() + cfg.sigma * normal(engine), 0.0);
            for (std::size_t k = 1; k < stride; ++k) {
                const double re = normal(engine);
                const double im = normal(engine);
                row[k] = spec[k] * std::polar(1.0, -static_cast<double>(k) * theta) +
                         cplx(complex_sd * re, complex_sd * im);
            }
        }
    });
    return ObservationSet(cfg.bandlimit, cfg.sigma, std::move(data));
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out.write(kMagic.data(), kMagic.size());
    put(out, static_cast<std::int64_t>(obs.bandlimit()));
    put(out, static_cast<std::int64_t>(obs.size()));
    put(out, obs.sigma());
    for (const cplx& c : obs.data()) {
        put(out, c.real());
        put(out, c.imag());
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

ObservationSet read_observations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("not an observation file (bad magic): " + path.string());
    }
    const auto bandlimit = get<std::int64_t>(in, path);
    const auto n = get<std::int64_t>(in, path);
    const auto sigma = get<double>(in, path);
    if (bandlimit < 1 || n < 1) {
        throw std::runtime_error("invalid header in observation file: " + path.string());
    }
    std::vector<cplx> data(static_cast<std::size_t>(n) * static_cast<std::size_t>(bandlimit + 1));
    for (cplx& c : data) {
        const double re = get<double>(in, path);
        const double im = get<double>(in, path);
        c = {re, im};
    }
    return ObservationSet(static_cast<int>(bandlimit), sigma, std::move(data));
}

} // namespace fastmra

#include "fastmra/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "fastmra/metrics.hpp"
#include "fastmra/simulate.hpp"

namespace fastmra {

namespace {

constexpr std::uint64_t kSigmaTag = 0x51474D41ULL;
constexpr std::uint64_t kSampleTag = 0x4E4E4E4EULL;

struct SweepPoint {
    double sigma;
    std::size_t n;
    TrialSeeds seeds;
};

template <class F>
double time_call(F&& call) {
    const auto start = std::chrono::steady_clock::now();
    call();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

TrialSeeds make_seeds(std::uint64_t seed_base, std::uint64_t point_hash, int trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    const std::uint64_t observations = mix_seed(seed_base ^ point_hash, t + 1);
    return {mix_seed(seed_base, t + 1), observations, mix_seed(observations, 0xE3ULL)};
}

int estimator_threads(const BenchConfig& cfg) {
    return cfg.sequential_timing ? 1 : cfg.fastmle.threads;
}

void run_point(const BenchConfig& cfg, const SweepPoint& point, int trial,
               std::vector<BenchRecord>& records) {
    const SignalSpectrum truth = random_signal(cfg.bandlimit, point.seeds.signal);
    const SimConfig sim{cfg.bandlimit, point.n, point.sigma, point.seeds.observations, cfg.fastmle.threads};
    const ObservationSet obs = generate_observations(truth, sim);
    const int threads = estimator_threads(cfg);
    const auto wants = [&](Method m) {
        return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };

    FastMleConfig fast_cfg = cfg.fastmle;
    fast_cfg.threads = threads;
    FastMleDiagnostics diagnostics;
    SignalSpectrum fast_estimate(cfg.bandlimit);
    double fast_seconds = 0.0;
    if (wants(Method::fast_mle) || wants(Method::em_warm)) {
        fast_seconds = time_call([&] { fast_estimate = fast_mle(obs, fast_cfg, &diagnostics); });
    }
    if (wants(Method::fast_mle)) {
        BenchRecord fast_record;
        fast_record.method = Method::fast_mle;
        fast_record.sigma = point.sigma;
        fast_record.n = point.n;
        fast_record.trial = trial;
        fast_record.mse = align_and_mse(fast_estimate, truth, cfg.n_align).mse;
        fast_record.wall_time_seconds = fast_seconds;
        fast_record.warnings = std::move(diagnostics.warnings);
        records.push_back(std::move(fast_record));
    }

    auto run_em = [&](Method method, EmInit init) {
        EmConfig em_cfg = cfg.em;
        em_cfg.init = std::move(init);
        em_cfg.threads = threads;
        em_cfg.audit_likelihood = false;
        EmResult result{SignalSpectrum(cfg.bandlimit), 0, false, {}, {}};
        const double seconds = time_call([&] { result = em_run(obs, em_cfg); });
        BenchRecord record;
        record.method = method;
        record.sigma = point.sigma;
        record.n = point.n;
        record.trial = trial;
        record.mse = align_and_mse(result.estimate, truth, cfg.n_align).mse;
        record.wall_time_seconds = seconds;
        record.em_iters = result.iters;
        if (!result.converged) {
            record.warnings.push_back("EM stopped at the iteration cap without converging");
        }
        records.push_back(std::move(record));
    };
    if (wants(Method::em_random)) {
        run_em(Method::em_random, RandomInit{point.seeds.em_init});
    }
    if (wants(Method::em_warm)) {
        run_em(Method::em_warm, fast_estimate);
    }
}

// One small run of every method so that first-touch costs do not land in a
// timed trial. Results are discarded.
void warm_up(const BenchConfig& cfg, double sigma, std::size_t n) {
    BenchConfig small = cfg;
    small.em.max_iters = std::min(cfg.em.max_iters, 3);
    small.n_align = std::min<std::size_t>(cfg.n_align, 360);
    const SweepPoint point{sigma, std::min<std::size_t>(n, 2000), make_seeds(cfg.seed_base, 0xAA55ULL, 0)};
    std::vector<BenchRecord> discarded;
    run_point(small, point, 0, discarded);
}

void validate(const BenchConfig& cfg) {
    if (cfg.bandlimit < 1) {
        throw std::invalid_argument("bench: bandlimit must be >= 1");
    }
    if (cfg.trials < 1) {
        throw std::invalid_argument("bench: trials must be >= 1");
    }
    if (cfg.methods.empty()) {
        throw std::invalid_argument("bench: methods must not be empty");
    }
    cfg.fastmle.validate(cfg.bandlimit);
    cfg.em.validate();
}

template <class SeedFor>
std::vector<BenchRecord> run_sweep(const BenchConfig& cfg, const std::vector<SweepPoint>& points,
                                   SeedFor&& seed_for) {
    if (cfg.warmup) {
        warm_up(cfg, points.front().sigma, points.front().n);
    }
    std::vector<BenchRecord> records;
    for (const SweepPoint& point : points) {
        for (int trial = 0; trial < cfg.trials; ++trial) {
            SweepPoint seeded = point;
            seeded.seeds = seed_for(point, trial);
            run_point(cfg, seeded, trial, records);
        }
    }
    for (const BenchRecord& record : records) {
        for (const std::string& warning : record.warnings) {
            std::clog << "[bench] " << method_name(record.method) << " sigma=" << record.sigma
                      << " n=" << record.n << " trial=" << record.trial << ": " << warning << '\n';
        }
    }
    sort_records(records);
    return records;
}

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                      std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

template <class T>
T parse_number(std::string_view field, std::string_view column) {
    T value{};
    const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
    if (result.ec != std::errc{} || result.ptr != field.data() + field.size()) {
        throw std::runtime_error("CSV: cannot parse column '" + std::string(column) + "' value '" +
                                 std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace

std::string_view method_name(Method method) {
    switch (method) {
    case Method::fast_mle: return "fast_mle";
    case Method::em_random: return "em_random";
    case Method::em_warm: return "em_warm";
    }
    throw std::invalid_argument("unknown method");
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::fast_mle, Method::em_random, Method::em_warm}) {
        if (method_name(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config: " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("config root must be an object: " + path.string());
    }

    static const std::set<std::string> known = {
        "bandlimit", "trials", "seed_base", "sigma_sweep", "n_fixed", "n_sweep",
        "sigma_fixed", "r_mle", "r_em", "em_max_iters", "em_tol", "n_align",
        "threads", "sequential_timing", "warmup", "output_path", "methods"};
    for (const auto& item : doc.items()) {
        if (known.count(item.key()) == 0) {
            throw std::runtime_error("unknown config key '" + item.key() + "' in " + path.string());
        }
    }

    BenchConfig cfg;
    try {
        cfg.bandlimit = doc.value("bandlimit", cfg.bandlimit);
        cfg.trials = doc.value("trials", cfg.trials);
        cfg.seed_base = doc.value("seed_base", cfg.seed_base);
        cfg.sigma_sweep = doc.value("sigma_sweep", cfg.sigma_sweep);
        cfg.n_fixed = doc.value("n_fixed", cfg.n_fixed);
        cfg.n_sweep = doc.value("n_sweep", cfg.n_sweep);
        cfg.sigma_fixed = doc.value("sigma_fixed", cfg.sigma_fixed);
        cfg.fastmle.r_mle = doc.value("r_mle", cfg.fastmle.r_mle);
        cfg.em.r_em = doc.value("r_em", cfg.em.r_em);
        cfg.em.max_iters = doc.value("em_max_iters", cfg.em.max_iters);
        cfg.em.tol = doc.value("em_tol", cfg.em.tol);
        cfg.n_align = doc.value("n_align", cfg.n_align);
        cfg.fastmle.threads = doc.value("threads", cfg.fastmle.threads);
        cfg.em.threads = cfg.fastmle.threads;
        cfg.sequential_timing = doc.value("sequential_timing", cfg.sequential_timing);
        cfg.warmup = doc.value("warmup", cfg.warmup);
        cfg.output_path = doc.value("output_path", std::string{});
        if (doc.contains("methods")) {
            cfg.methods.clear();
            for (const auto& name : doc.at("methods").get<std::vector<std::string>>()) {
                cfg.methods.push_back(parse_method(name));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad value in config " + path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("bad value in config " + path.string() + ": " + e.what());
    }
    return cfg;
}

bool BenchRecord::same_row(const BenchRecord& other) const {
    return std::tie(method, sigma, n, trial, mse, wall_time_seconds, em_iters) ==
           std::tie(other.method, other.sigma, other.n, other.trial, other.mse,
                    other.wall_time_seconds, other.em_iters);
}

TrialSeeds sigma_trial_seeds(std::uint64_t seed_base, double sigma, int trial) {
    return make_seeds(seed_base, mix_seed(std::bit_cast<std::uint64_t>(sigma), kSigmaTag), trial);
}

TrialSeeds n_trial_seeds(std::uint64_t seed_base, std::size_t n, int trial) {
    return make_seeds(seed_base, mix_seed(static_cast<std::uint64_t>(n), kSampleTag), trial);
}

std::vector<BenchRecord> run_sigma_sweep(const BenchConfig& cfg) {
    validate(cfg);
    if (cfg.sigma_sweep.empty()) {
        throw std::invalid_argument("bench: sigma_sweep is empty");
    }
    if (cfg.n_fixed < 1) {
        throw std::invalid_argument("bench: n_fixed must be >= 1");
    }
    std::vector<SweepPoint> points;
    for (double sigma : cfg.sigma_sweep) {
        if (!(sigma > 0.0)) {
            throw std::invalid_argument("bench: every swept sigma must be > 0");
        }
        points.push_back({sigma, cfg.n_fixed, {}});
    }
    return run_sweep(cfg, points, [&](const SweepPoint& point, int trial) {
        return sigma_trial_seeds(cfg.seed_base, point.sigma, trial);
    });
}

std::vector<BenchRecord> run_n_sweep(const BenchConfig& cfg) {
    validate(cfg);
    if (cfg.n_sweep.empty()) {
        throw std::invalid_argument("bench: n_sweep is empty");
    }
    if (!(cfg.sigma_fixed > 0.0)) {
        throw std::invalid_argument("bench: sigma_fixed must be > 0");
    }
    std::vector<SweepPoint> points;
    for (std::size_t n : cfg.n_sweep) {
        if (n < 1) {
            throw std::invalid_argument("bench: every swept n must be >= 1");
        }
        points.push_back({cfg.sigma_fixed, n, {}});
    }
    return run_sweep(cfg, points, [&](const SweepPoint& point, int trial) {
        return n_trial_seeds(cfg.seed_base, point.n, trial);
    });
}

void sort_records(std::vector<BenchRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
        return std::tie(a.method, a.sigma, a.n, a.trial) < std::tie(b.method, b.sigma, b.n, b.trial);
    });
}

std::string to_csv(const std::vector<BenchRecord>& records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const BenchRecord& r : records) {
        out += method_name(r.method);
        out += ',' + format_double(r.sigma);
        out += ',' + std::to_string(r.n);
        out += ',' + std::to_string(r.trial);
        out += ',' + format_double(r.mse);
        out += ',' + format_double(r.wall_time_seconds);
        out += ',';
        if (r.em_iters) {
            out += std::to_string(*r.em_iters);
        }
        out += '\n';
    }
    return out;
}

std::vector<BenchRecord> parse_csv(std::string_view text) {
    std::vector<BenchRecord> records;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw std::runtime_error("CSV: unexpected header '" + std::string(line) + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 7) {
            throw std::runtime_error("CSV: expected 7 fields, got " + std::to_string(fields.size()) +
                                     " in '" + std::string(line) + "'");
        }
        BenchRecord r;
        r.method = parse_method(fields[0]);
        r.sigma = parse_number<double>(fields[1], "sigma");
        r.n = parse_number<std::size_t>(fields[2], "n");
        r.trial = parse_number<int>(fields[3], "trial");
        r.mse = parse_number<double>(fields[4], "mse");
        r.wall_time_seconds = parse_number<double>(fields[5], "wall_time_seconds");
        if (!fields[6].empty()) {
            r.em_iters = parse_number<int>(fields[6], "em_iters");
        }
        records.push_back(std::move(r));
    }
    if (!header_seen) {
        throw std::runtime_error("CSV: missing header");
    }
    return records;
}

void emit_csv(std::vector<BenchRecord> records, const std::filesystem::path& path) {
    sort_records(records);
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open CSV for writing: " + path.string());
    }
    out << to_csv(records);
    if (!out) {
        throw std::runtime_error("failed writing CSV: " + path.string());
    }
}

std::vector<BenchRecord> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open CSV for reading: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

std::vector<SeriesSummary> summarize(const std::vector<BenchRecord>& records) {
    struct Acc {
        int count = 0;
        double mse = 0.0, mse_sq = 0.0, seconds = 0.0, iters = 0.0;
    };
    std::map<std::tuple<Method, double, std::size_t>, Acc> groups;
    for (const BenchRecord& r : records) {
        Acc& acc = groups[{r.method, r.sigma, r.n}];
        ++acc.count;
        acc.mse += r.mse;
        acc.mse_sq += r.mse * r.mse;
        acc.seconds += r.wall_time_seconds;
        acc.iters += r.em_iters.value_or(0);
    }
    std::vector<SeriesSummary> out;
    for (const auto& [key, acc] : groups) {
        const double count = acc.count;
        const double mean = acc.mse / count;
        double stderr_mse = 0.0;
        if (acc.count > 1) {
            const double variance = std::max(0.0, (acc.mse_sq - count * mean * mean) / (count - 1));
            stderr_mse = std::sqrt(variance / count);
        }
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), acc.count, mean,
                       stderr_mse, acc.seconds / count, acc.iters / count});
    }
    return out;
}

} // namespace fastmra

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fastmra/bench.hpp"

using namespace fastmra;

namespace {

BenchConfig tiny_config() {
    BenchConfig cfg;
    cfg.bandlimit = 3;
    cfg.trials = 1;
    cfg.seed_base = 7;
    cfg.sigma_sweep = {2.0};
    cfg.n_fixed = 200;
    cfg.n_sweep = {100};
    cfg.sigma_fixed = 2.0;
    cfg.fastmle.r_mle = 64;
    cfg.em.r_em = 64;
    cfg.em.max_iters = 5;
    cfg.n_align = 720;
    cfg.warmup = false;
    return cfg;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_SUITE("bench") {

TEST_CASE("one sweep point and one trial give one record per method") {
    const BenchConfig cfg = tiny_config();
    const auto sigma_records = run_sigma_sweep(cfg);
    REQUIRE(sigma_records.size() == 3);
    CHECK(sigma_records[0].method == Method::fast_mle);
    CHECK(sigma_records[1].method == Method::em_random);
    CHECK(sigma_records[2].method == Method::em_warm);
    CHECK_FALSE(sigma_records[0].em_iters.has_value());
    CHECK(sigma_records[1].em_iters.has_value());
    for (const auto& r : sigma_records) {
        CHECK(r.mse >= 0.0);
        CHECK(r.wall_time_seconds > 0.0);
        CHECK(r.sigma == 2.0);
        CHECK(r.n == 200);
    }
    CHECK(run_n_sweep(cfg).size() == 3);
}

TEST_CASE("method selection") {
    BenchConfig cfg = tiny_config();
    const auto all = run_sigma_sweep(cfg);

    cfg.methods = {Method::em_warm};
    const auto warm_only = run_sigma_sweep(cfg);
    REQUIRE(warm_only.size() == 1);
    CHECK(warm_only[0].mse == all[2].mse);
    CHECK(warm_only[0].em_iters == all[2].em_iters);

    cfg.methods = {Method::fast_mle};
    const auto fast_only = run_sigma_sweep(cfg);
    REQUIRE(fast_only.size() == 1);
    CHECK(fast_only[0].mse == all[0].mse);

    cfg.methods = {};
    CHECK_THROWS_AS(run_sigma_sweep(cfg), std::invalid_argument);
}

TEST_CASE("mse and iteration columns are reproducible") {
    BenchConfig cfg = tiny_config();
    cfg.trials = 2;
    cfg.sigma_sweep = {1.5, 3.0};
    const auto a = run_sigma_sweep(cfg);
    const auto b = run_sigma_sweep(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mse == b[i].mse);
        CHECK(a[i].em_iters == b[i].em_iters);
    }
}

TEST_CASE("adding a sweep point leaves existing trials untouched") {
    BenchConfig cfg = tiny_config();
    const auto before = run_sigma_sweep(cfg);
    cfg.sigma_sweep = {1.0, 2.0};
    const auto after = run_sigma_sweep(cfg);
    for (const auto& r : before) {
        bool found = false;
        for (const auto& s : after) {
            if (s.method == r.method && s.sigma == r.sigma && s.trial == r.trial) {
                CHECK(s.mse == r.mse);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("sweep configuration errors") {
    BenchConfig cfg = tiny_config();
    cfg.sigma_sweep = {};
    CHECK_THROWS_AS(run_sigma_sweep(cfg), std::invalid_argument);
    cfg.sigma_sweep = {0.0};
    CHECK_THROWS_AS(run_sigma_sweep(cfg), std::invalid_argument);
    cfg = tiny_config();
    cfg.trials = 0;
    CHECK_THROWS_AS(run_n_sweep(cfg), std::invalid_argument);
    cfg = tiny_config();
    cfg.n_sweep = {};
    CHECK_THROWS_AS(run_n_sweep(cfg), std::invalid_argument);
}

TEST_CASE("emit_csv") {
    const auto path = temp_file("fastmra_bench_test.csv");

    SUBCASE("empty record list writes only the header") {
        emit_csv({}, path);
        CHECK(slurp(path) == std::string(kCsvHeader) + "\n");
    }

    SUBCASE("three records give four lines, em_iters empty for fast_mle") {
        emit_csv(run_sigma_sweep(tiny_config()), path);
        const std::string text = slurp(path);
        CHECK(count_lines(text) == 4);
        CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
        const auto second_line = text.substr(text.find('\n') + 1);
        CHECK(second_line.rfind("fast_mle,", 0) == 0);
        CHECK(second_line.substr(0, second_line.find('\n')).back() == ',');
    }

    SUBCASE("rows are written in (method, sigma, n, trial) order") {
        std::vector<BenchRecord> records(4);
        records[0].method = Method::em_warm;
        records[1].method = Method::fast_mle;
        records[1].sigma = 3.0;
        records[2].method = Method::fast_mle;
        records[2].sigma = 1.0;
        records[2].trial = 1;
        records[3].method = Method::fast_mle;
        records[3].sigma = 1.0;
        emit_csv(records, path);
        const auto back = read_csv(path);
        CHECK(back[0].sigma == 1.0);
        CHECK(back[0].trial == 0);
        CHECK(back[1].trial == 1);
        CHECK(back[2].sigma == 3.0);
        CHECK(back[3].method == Method::em_warm);
    }

    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit_csv({}, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST_CASE("property: CSV round trip is exact") {
    std::vector<BenchRecord> records;
    const double awkward[] = {0.1, 1.0 / 3.0, 1e-300, 4.9e-324, 12345678.901234567, 2.0 / 7.0};
    int trial = 0;
    for (double x : awkward) {
        for (Method m : {Method::fast_mle, Method::em_random, Method::em_warm}) {
            BenchRecord r;
            r.method = m;
            r.sigma = x * 3.0;
            r.n = 100000 + static_cast<std::size_t>(trial);
            r.trial = trial;
            r.mse = x;
            r.wall_time_seconds = x * 1e-3 + 1e-9;
            if (m != Method::fast_mle) {
                r.em_iters = trial * 3 + 1;
            }
            records.push_back(r);
        }
        ++trial;
    }
    sort_records(records);
    const auto back = parse_csv(to_csv(records));
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].same_row(records[i]));
    }
}

TEST_CASE("malformed CSV is rejected") {
    CHECK_THROWS_AS(parse_csv(""), std::runtime_error);
    CHECK_THROWS_AS(parse_csv("method,sigma\n"), std::runtime_error);
    const std::string header = std::string(kCsvHeader) + "\n";
    CHECK_THROWS_AS(parse_csv(header + "fast_mle,1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_csv(header + "fast_mle,x,2,3,0.1,0.2,\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_csv(header + "bogus,1,2,3,0.1,0.2,\n"), std::invalid_argument);
    CHECK(parse_csv(header).empty());
}

TEST_CASE("summarize groups trials") {
    std::vector<BenchRecord> records(3);
    records[0].mse = 1.0;
    records[1].mse = 3.0;
    records[1].trial = 1;
    records[2].method = Method::em_random;
    records[2].mse = 5.0;
    records[2].em_iters = 4;
    const auto summary = summarize(records);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0].count == 2);
    CHECK(summary[0].mean_mse == 2.0);
    CHECK(summary[0].stderr_mse == doctest::Approx(1.0));
    CHECK(summary[1].mean_em_iters == 4.0);
}

TEST_CASE("load_bench_config") {
    const auto path = temp_file("fastmra_bench_cfg.json");
    {
        std::ofstream out(path);
        out << R"({"bandlimit": 4, "trials": 2, "seed_base": 9, "sigma_sweep": [2, 4.5],
                   "n_fixed": 3000, "n_sweep": [100, 200], "sigma_fixed": 12,
                   "r_mle": 300, "r_em": 200, "em_max_iters": 20, "em_tol": 1e-5,
                   "n_align": 500, "threads": 1, "sequential_timing": true, "warmup": false,
                   "output_path": "out.csv", "methods": ["em_random", "fast_mle"]})";
    }
    const BenchConfig cfg = load_bench_config(path);
    CHECK(cfg.bandlimit == 4);
    CHECK(cfg.trials == 2);
    CHECK(cfg.seed_base == 9);
    CHECK(cfg.sigma_sweep == std::vector<double>{2.0, 4.5});
    CHECK(cfg.n_sweep == std::vector<std::size_t>{100, 200});
    CHECK(cfg.fastmle.r_mle == 300);
    CHECK(cfg.em.r_em == 200);
    CHECK(cfg.em.max_iters == 20);
    CHECK(cfg.em.tol == 1e-5);
    CHECK(cfg.sequential_timing);
    CHECK_FALSE(cfg.warmup);
    CHECK(cfg.output_path == "out.csv");
    CHECK(cfg.methods == std::vector<Method>{Method::em_random, Method::fast_mle});

    {
        std::ofstream out(path);
        out << R"({"bandlimit": 4, "sigma_sweeep": [1]})";
    }
    CHECK_THROWS_AS(load_bench_config(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << R"({"bandlimit": "five"})";
    }
    CHECK_THROWS_AS(load_bench_config(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << R"({"methods": ["em_cold"]})";
    }
    CHECK_THROWS_AS(load_bench_config(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_bench_config(path), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_bench_config(path), std::runtime_error);
}

}

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fastmra/bench.hpp"
#include "fastmra/em.hpp"
#include "fastmra/fastmle.hpp"
#include "fastmra/metrics.hpp"
#include "fastmra/simulate.hpp"

namespace py = pybind11;
using fastmra::cplx;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

py::array_t<cplx> to_array(const fastmra::SignalSpectrum& spec) {
    py::array_t<cplx> out(static_cast<py::ssize_t>(spec.coeffs().size()));
    std::copy(spec.coeffs().begin(), spec.coeffs().end(), out.mutable_data());
    return out;
}

fastmra::SignalSpectrum to_spectrum(const ComplexArray& coeffs) {
    if (coeffs.ndim() != 1) {
        throw py::value_error("spectrum must be a 1-D complex array");
    }
    std::vector<cplx> c(coeffs.data(), coeffs.data() + coeffs.size());
    return fastmra::SignalSpectrum(std::move(c));
}

fastmra::ObservationSet to_observations(const ComplexArray& data, double sigma) {
    if (data.ndim() != 2 || data.shape(1) < 2) {
        throw py::value_error("observations must be an (n, L+1) complex array with L >= 1");
    }
    std::vector<cplx> flat(data.data(), data.data() + data.size());
    return fastmra::ObservationSet(static_cast<int>(data.shape(1) - 1), sigma, std::move(flat));
}

py::array_t<cplx> observations_array(const fastmra::ObservationSet& obs) {
    py::array_t<cplx> out({static_cast<py::ssize_t>(obs.size()), static_cast<py::ssize_t>(obs.stride())});
    std::copy(obs.data().begin(), obs.data().end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fast low-SNR MLE and EM for multi-reference alignment over SO(2)";

    m.def("random_signal",
          [](int bandlimit, std::uint64_t seed) { return to_array(fastmra::random_signal(bandlimit, seed)); },
          py::arg("bandlimit"), py::arg("seed"));

    m.def("rotate_spectrum",
          [](const ComplexArray& coeffs, double theta) {
              return to_array(fastmra::rotate_spectrum(to_spectrum(coeffs), theta));
          },
          py::arg("coeffs"), py::arg("theta"));

    m.def("generate_observations",
          [](const ComplexArray& coeffs, std::size_t n, double sigma, std::uint64_t seed, int threads) {
              const auto spec = to_spectrum(coeffs);
              fastmra::ObservationSet obs = [&] {
                  py::gil_scoped_release release;
                  return fastmra::generate_observations(spec, {spec.bandlimit(), n, sigma, seed, threads});
              }();
              return observations_array(obs);
          },
          py::arg("coeffs"), py::arg("n"), py::arg("sigma"), py::arg("seed"), py::arg("threads") = 0);

    m.def("estimate_dc",
          [](const ComplexArray& data, double sigma) { return fastmra::estimate_dc(to_observations(data, sigma)); },
          py::arg("observations"), py::arg("sigma"));

    m.def("estimate_magnitudes",
          [](const ComplexArray& data, double sigma) {
              return fastmra::estimate_magnitudes(to_observations(data, sigma));
          },
          py::arg("observations"), py::arg("sigma"));

    m.def("fast_mle",
          [](const ComplexArray& data, double sigma, std::size_t r_mle, int threads) {
              const auto obs = to_observations(data, sigma);
              fastmra::FastMleConfig cfg;
              cfg.r_mle = r_mle;
              cfg.threads = threads;
              fastmra::FastMleDiagnostics diagnostics;
              fastmra::SignalSpectrum est(obs.bandlimit());
              {
                  py::gil_scoped_release release;
                  est = fastmra::fast_mle(obs, cfg, &diagnostics);
              }
              return py::make_tuple(to_array(est), diagnostics.warnings);
          },
          py::arg("observations"), py::arg("sigma"), py::arg("r_mle") = 500, py::arg("threads") = 0,
          "Returns (estimate, warnings).");

    m.def("em_run",
          [](const ComplexArray& data, double sigma, std::size_t r_em, int max_iters, double tol,
             std::optional<ComplexArray> init, std::uint64_t seed, int threads, bool audit_likelihood) {
              const auto obs = to_observations(data, sigma);
              fastmra::EmConfig cfg;
              cfg.r_em = r_em;
              cfg.max_iters = max_iters;
              cfg.tol = tol;
              cfg.threads = threads;
              cfg.audit_likelihood = audit_likelihood;
              if (init) {
                  cfg.init = to_spectrum(*init);
              } else {
                  cfg.init = fastmra::RandomInit{seed};
              }
              fastmra::EmResult result{fastmra::SignalSpectrum(obs.bandlimit())};
              {
                  py::gil_scoped_release release;
                  result = fastmra::em_run(obs, cfg);
              }
              py::dict out;
              out["estimate"] = to_array(result.estimate);
              out["iters"] = result.iters;
              out["converged"] = result.converged;
              out["trace"] = result.trace;
              out["log_likelihood"] = result.log_likelihood;
              return out;
          },
          py::arg("observations"), py::arg("sigma"), py::arg("r_em") = 1000, py::arg("max_iters") = 500,
          py::arg("tol") = 1e-6, py::arg("init") = py::none(), py::arg("seed") = 0, py::arg("threads") = 0,
          py::arg("audit_likelihood") = false);

    m.def("align_and_mse",
          [](const ComplexArray& estimate, const ComplexArray& truth, std::size_t n_align) {
              const auto err = fastmra::align_and_mse(to_spectrum(estimate), to_spectrum(truth), n_align);
              return py::make_tuple(err.mse, err.alpha_star);
          },
          py::arg("estimate"), py::arg("truth"), py::arg("n_align") = 10000);

    m.def("write_observations",
          [](const std::string& path, const ComplexArray& data, double sigma) {
              fastmra::write_observations(path, to_observations(data, sigma));
          },
          py::arg("path"), py::arg("observations"), py::arg("sigma"));

    m.def("read_observations",
          [](const std::string& path) {
              const auto obs = fastmra::read_observations(path);
              return py::make_tuple(observations_array(obs), obs.sigma());
          },
          py::arg("path"), "Returns (observations, sigma).");

    m.attr("CSV_HEADER") = std::string(fastmra::kCsvHeader);

    py::register_exception<fastmra::DegeneratePhaseError>(m, "DegeneratePhaseError", PyExc_RuntimeError);
}

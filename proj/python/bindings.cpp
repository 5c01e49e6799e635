#include "mlmc/dense_oracle.hpp"
#include "mlmc/engine.hpp"
#include "mlmc/errors.hpp"
#include "mlmc/matrix_market.hpp"
#include "mlmc/problems.hpp"
#include "mlmc/random.hpp"
#include "mlmc/report_io.hpp"
#include "mlmc/special.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace mlmc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_array_2d(std::size_t n, std::size_t m, const std::vector<double>& v) {
    Array out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(m)});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

SparseMatrix from_dense_array(const Array& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
    return SparseMatrix::from_dense(a.shape(0), a.shape(1), std::span<const double>(a.data(), a.size()));
}

py::dict report_dict(const EstimateReport& r) {
    py::dict d = py::module_::import("json").attr("loads")(report_to_json(r).dump());
    d["values"] = to_array(r.values);
    d["sample_variance"] = to_array(r.sample_variance);
    d["ci_halfwidth"] = to_array(r.ci_halfwidth);
    d["wall_time_s"] = r.wall_time_s;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo action of the Mittag-Leffler matrix function";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<OracleUnavailable>(m, "OracleUnavailable", base.ptr());

    py::class_<SparseMatrix>(m, "SparseMatrix")
        .def_static("from_dense", &from_dense_array, py::arg("dense"))
        .def_property_readonly("shape", [](const SparseMatrix& a) { return py::make_tuple(a.n_rows(), a.n_cols()); })
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def("to_dense", [](const SparseMatrix& a) { return to_array_2d(a.n_rows(), a.n_cols(), a.to_dense()); })
        .def("multiply", [](const SparseMatrix& a, const Array& x) { return to_array(a.multiply(to_vector(x))); })
        .def("__eq__", [](const SparseMatrix& a, const SparseMatrix& b) { return a == b; });

    m.def("read_matrix_market", [](const std::string& p) { return read_matrix_market(p); }, py::arg("path"));
    m.def("write_matrix_market", [](const SparseMatrix& a, const std::string& p) { write_matrix_market(a, p); },
          py::arg("matrix"), py::arg("path"));
    m.def("read_vector", [](const std::string& p) { return to_array(read_vector(p)); }, py::arg("path"));
    m.def("write_vector", [](const Array& v, const std::string& p) { write_vector(to_vector(v), p); },
          py::arg("vector"), py::arg("path"));

    m.def("gamma", &gamma_fn, py::arg("x"));
    m.def("mittag_leffler", [](double z, double alpha, double beta) { return ml_scalar({alpha, beta}, z); },
          py::arg("z"), py::arg("alpha"), py::arg("beta") = 1.0);
    m.def(
        "sample_ml",
        [](double alpha, double rate, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
            const MittagLefflerSampler sampler(alpha);
            const double scale = sampler.scale(rate);
            RandomStream s(seed, stream);
            std::vector<double> out(count);
            for (double& x : out) x = sampler(rate, scale, s);
            return to_array(out);
        },
        py::arg("alpha"), py::arg("rate"), py::arg("count"), py::arg("seed") = 0, py::arg("stream") = 0);

    m.def(
        "solve",
        [](const SparseMatrix& a, const Array& u, double alpha, double t, std::uint64_t n_paths, std::uint64_t seed,
           unsigned workers, std::optional<std::vector<index_t>> entries, double confidence, bool allow_absorbing) {
            SolveRequest req;
            req.alpha = alpha;
            req.t = t;
            req.n_paths = n_paths;
            req.root_seed = seed;
            req.workers = workers;
            req.confidence = confidence;
            req.allow_absorbing = allow_absorbing;
            if (entries) {
                req.mode = SolveMode::entries;
                req.entries = *entries;
            }
            const std::vector<double> uv = to_vector(u);
            EstimateReport r;
            {
                py::gil_scoped_release release;
                r = solve(a, uv, req);
            }
            return report_dict(r);
        },
        py::arg("matrix"), py::arg("u"), py::arg("alpha"), py::arg("t"), py::arg("n_paths"), py::arg("seed") = 0,
        py::arg("workers") = 1, py::arg("entries") = py::none(), py::arg("confidence") = 0.95,
        py::arg("allow_absorbing") = false);

    m.def(
        "dense_oracle",
        [](const Array& a, double alpha, double t) {
            if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw DimensionError("expected a square 2-D array");
            const std::size_t n = a.shape(0);
            const DenseMatrix e = dense_ml_oracle(DenseMatrix(n, {a.data(), a.data() + a.size()}), alpha, t);
            return to_array_2d(n, n, e.values);
        },
        py::arg("matrix"), py::arg("alpha"), py::arg("t"));

    m.def(
        "diffusion_2d",
        [](std::size_t m_, double mu, double c) {
            DiffusionSpec s;
            s.m = m_;
            s.mu = mu;
            s.c_strength = c;
            ProblemBundle b = build_diffusion_2d(s);
            py::object meta = py::module_::import("json").attr("loads")(b.metadata.dump());
            return py::make_tuple(std::move(b.a), to_array(b.u0), meta);
        },
        py::arg("m"), py::arg("mu") = 1.0, py::arg("c") = 1.0 / 4096.0);

    m.def(
        "diffusion_solution",
        [](std::size_t m_, double alpha, double t, double mu, double c) {
            DiffusionSpec s;
            s.m = m_;
            s.mu = mu;
            s.c_strength = c;
            s.alpha = alpha;
            s.t = t;
            return to_array(diffusion_analytic_solution(s));
        },
        py::arg("m"), py::arg("alpha"), py::arg("t"), py::arg("mu") = 1.0, py::arg("c") = 1.0 / 4096.0);
}

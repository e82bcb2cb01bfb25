#include "steklov/analysis.hpp"
#include "steklov/cli.hpp"
#include "steklov/errors.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace steklov;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Vector from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
    return Vector(a.data(), a.data() + a.size());
}

Vector field_arg(const Mesh& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    Vector u = from_array(a);
    if (u.size() != mesh.vertices.size())
        throw py::value_error("field length does not match the vertex count");
    return u;
}

SolverOptions solver_options(std::optional<std::vector<double>> eps_schedule, int restarts, std::uint64_t seed,
                             int max_iterations) {
    SolverOptions o;
    if (eps_schedule) o.eps_schedule = *eps_schedule;
    o.restarts = restarts;
    o.seed = seed;
    o.max_iterations = max_iterations;
    return o;
}

MeshParams mesh_params(double target_h, std::size_t n_lateral, std::size_t n_arc, double grading_q,
                       double tip_grading) {
    MeshParams m;
    m.target_h = target_h;
    m.n_lateral = n_lateral;
    m.n_arc = n_arc;
    m.grading_q = grading_q;
    m.tip_grading = tip_grading;
    return m;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steklov p-Laplacian eigenvalues on a cusp domain";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<MeshError>(m, "MeshError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<DomainSpec>(m, "DomainSpec")
        .def_static("cusp", &DomainSpec::cusp, py::arg("alpha"))
        .def_static("disk", &DomainSpec::disk, py::arg("radius") = 1.0)
        .def_readonly("alpha", &DomainSpec::alpha)
        .def_readonly("disk_radius", &DomainSpec::disk_radius)
        .def_property_readonly("is_disk", [](const DomainSpec& d) { return d.kind == DomainKind::DiskValidation; })
        .def("validate", &DomainSpec::validate);

    m.def("cusp_cap_intersection", [](double alpha) { return cusp_cap_intersection(DomainSpec::cusp(alpha)); },
          py::arg("alpha"), "Height where the lateral curves meet the cap circle.");

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("vertices",
                               [](const Mesh& mesh) {
                                   py::array_t<double> a({static_cast<py::ssize_t>(mesh.vertices.size()),
                                                          py::ssize_t{2}});
                                   auto r = a.mutable_unchecked<2>();
                                   for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
                                       r(i, 0) = mesh.vertices[i].x;
                                       r(i, 1) = mesh.vertices[i].y;
                                   }
                                   return a;
                               })
        .def_property_readonly("triangles",
                               [](const Mesh& mesh) {
                                   py::array_t<Index> a({static_cast<py::ssize_t>(mesh.triangles.size()),
                                                         py::ssize_t{3}});
                                   auto r = a.mutable_unchecked<2>();
                                   for (std::size_t k = 0; k < mesh.triangles.size(); ++k)
                                       for (int j = 0; j < 3; ++j) r(k, j) = mesh.triangles[k][j];
                                   return a;
                               })
        .def_property_readonly("boundary_edges",
                               [](const Mesh& mesh) {
                                   py::array_t<Index> a({static_cast<py::ssize_t>(mesh.boundary_edges.size()),
                                                         py::ssize_t{2}});
                                   auto r = a.mutable_unchecked<2>();
                                   for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
                                       r(k, 0) = mesh.boundary_edges[k].v[0];
                                       r(k, 1) = mesh.boundary_edges[k].v[1];
                                   }
                                   return a;
                               })
        .def_property_readonly("boundary_tags",
                               [](const Mesh& mesh) {
                                   std::vector<std::string> tags;
                                   for (const auto& e : mesh.boundary_edges) tags.push_back(to_string(e.tag));
                                   return tags;
                               })
        .def_readonly("h_max", &Mesh::h_max)
        .def_readonly("h_min", &Mesh::h_min)
        .def_readonly("id", &Mesh::id)
        .def_property_readonly("n_vertices", [](const Mesh& mesh) { return mesh.vertices.size(); })
        .def_property_readonly("n_triangles", [](const Mesh& mesh) { return mesh.triangles.size(); })
        .def("area", &Mesh::area)
        .def("to_vtk", [](const Mesh& mesh) { return vtk_text(mesh, mesh.id); });

    m.def(
        "build_mesh",
        [](const DomainSpec& domain, double target_h, std::size_t n_lateral, std::size_t n_arc, double grading_q,
           double tip_grading, int refinements) {
            const MeshParams params = mesh_params(target_h, n_lateral, n_arc, grading_q, tip_grading);
            py::gil_scoped_release release;
            return build_refined_mesh(domain, params, refinements);
        },
        py::arg("domain"), py::arg("target_h") = 0.25, py::arg("n_lateral") = 16, py::arg("n_arc") = 32,
        py::arg("grading_q") = 2.0, py::arg("tip_grading") = 2.0, py::arg("refinements") = 0);

    py::class_<EigenResult>(m, "EigenResult")
        .def_readonly("lambda_", &EigenResult::lambda)
        .def_property_readonly("u", [](const EigenResult& r) { return to_array(r.u); })
        .def_readonly("iterations", &EigenResult::iterations)
        .def_readonly("converged", &EigenResult::converged)
        .def_readonly("weakform_residual", &EigenResult::weakform_residual)
        .def_readonly("constraint_residual", &EigenResult::constraint_residual)
        .def_readonly("energy_history", &EigenResult::energy_history)
        .def_readonly("spectrum", &EigenResult::spectrum)
        .def_readonly("restart_lambdas", &EigenResult::restart_lambdas);

    m.def(
        "solve_p",
        [](const Mesh& mesh, double p, bool weighted, std::optional<std::vector<double>> eps_schedule, int restarts,
           std::uint64_t seed, int max_iterations, int quadrature_order) {
            const ProblemConfig cfg{p, weighted, 0.0, quadrature_order};
            const SolverOptions o = solver_options(std::move(eps_schedule), restarts, seed, max_iterations);
            py::gil_scoped_release release;
            return solve_p(mesh, cfg, o);
        },
        py::arg("mesh"), py::arg("p") = 2.0, py::arg("weighted") = true, py::arg("eps_schedule") = py::none(),
        py::arg("restarts") = 3, py::arg("seed") = 1, py::arg("max_iterations") = 5000,
        py::arg("quadrature_order") = 2);

    m.def(
        "solve_p2",
        [](const Mesh& mesh, bool weighted, std::size_t spectrum_count) {
            py::gil_scoped_release release;
            return solve_p2(mesh, weighted, spectrum_count);
        },
        py::arg("mesh"), py::arg("weighted") = true, py::arg("spectrum_count") = 4);

    m.def(
        "rayleigh",
        [](const Mesh& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& u, double p,
           bool weighted) { return rayleigh(mesh, ProblemConfig{p, weighted, 0.0, 2}, field_arg(mesh, u)); },
        py::arg("mesh"), py::arg("u"), py::arg("p") = 2.0, py::arg("weighted") = true);

    m.def(
        "energy",
        [](const Mesh& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& u, double p,
           double eps) { return energy(mesh, p, eps, field_arg(mesh, u)); },
        py::arg("mesh"), py::arg("u"), py::arg("p") = 2.0, py::arg("eps") = 0.0);

    m.def(
        "energy_gradient",
        [](const Mesh& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& u, double p,
           double eps) { return to_array(energy_gradient(mesh, p, eps, field_arg(mesh, u))); },
        py::arg("mesh"), py::arg("u"), py::arg("p") = 2.0, py::arg("eps") = 0.0);

    py::class_<FpResult>(m, "FpResult")
        .def_readonly("constant", &FpResult::constant)
        .def_readonly("mu", &FpResult::mu)
        .def_property_readonly("u", [](const FpResult& r) { return to_array(r.u); })
        .def_readonly("iterations", &FpResult::iterations)
        .def_readonly("converged", &FpResult::converged)
        .def_readonly("weakform_residual", &FpResult::weakform_residual);

    m.def(
        "fp_constant",
        [](const Mesh& mesh, double p, bool weighted, bool zero_mean) {
            const ProblemConfig cfg{p, weighted, 0.0, 2};
            const auto constraint = zero_mean ? FpConstraint::ZeroMean : FpConstraint::WeightedBoundary;
            py::gil_scoped_release release;
            return fp_constant(mesh, cfg, SolverOptions{}, constraint);
        },
        py::arg("mesh"), py::arg("p") = 2.0, py::arg("weighted") = true, py::arg("zero_mean") = false);

    m.def(
        "trace_spectrum",
        [](const Mesh& mesh, bool weighted, std::size_t k) {
            py::gil_scoped_release release;
            return trace_spectrum(mesh, weighted, k);
        },
        py::arg("mesh"), py::arg("weighted") = true, py::arg("k") = 4);

    m.def(
        "classify_trend",
        [](const std::vector<double>& values, double threshold) { return to_string(classify_trend(values, threshold)); },
        py::arg("values"), py::arg("threshold") = 0.05);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("alpha", &SweepRow::alpha)
        .def_readonly("p", &SweepRow::p)
        .def_readonly("weighted", &SweepRow::weighted)
        .def_readonly("level", &SweepRow::level)
        .def_readonly("h_max", &SweepRow::h_max)
        .def_readonly("lambda_", &SweepRow::lambda)
        .def_readonly("fp_constant", &SweepRow::fp_constant)
        .def_readonly("iterations", &SweepRow::iterations)
        .def_readonly("converged", &SweepRow::converged)
        .def_property_readonly("trend", [](const SweepRow& r) { return to_string(r.trend); })
        .def_readonly("mesh_id", &SweepRow::mesh_id)
        .def_readonly("error", &SweepRow::error);

    m.def(
        "alpha_sweep",
        [](const std::vector<double>& alphas, double p, int refinements, bool include_unweighted, bool include_fp,
           double target_h, int restarts, std::uint64_t seed, int threads) {
            SweepConfig config;
            config.problem.p = p;
            config.mesh.target_h = target_h;
            config.solver.restarts = restarts;
            config.solver.seed = seed;
            config.refinements = refinements;
            config.include_unweighted = include_unweighted;
            config.include_fp = include_fp;
            config.threads = threads;
            py::gil_scoped_release release;
            return alpha_sweep(config, alphas).rows;
        },
        py::arg("alphas"), py::arg("p") = 2.0, py::arg("refinements") = 2, py::arg("include_unweighted") = true,
        py::arg("include_fp") = true, py::arg("target_h") = 0.25, py::arg("restarts") = 3, py::arg("seed") = 1,
        py::arg("threads") = 1);

    m.def(
        "run_validation",
        [](double tolerance_scale) {
            py::list out;
            for (const auto& c : run_validation(tolerance_scale)) {
                py::dict d;
                d["name"] = c.name;
                d["expected"] = c.expected;
                d["actual"] = c.actual;
                d["tolerance"] = c.tolerance;
                d["passed"] = c.passed;
                out.append(d);
            }
            return out;
        },
        py::arg("tolerance_scale") = 1.0);

    m.def(
        "run_command",
        [](const std::string& command, std::optional<std::filesystem::path> config,
           std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
            std::ostringstream so, se;
            int code;
            {
                py::gil_scoped_release release;
                code = run_command(CliRequest{command, std::move(config), seed, std::move(out)}, so, se);
            }
            return py::make_tuple(code, so.str(), se.str());
        },
        py::arg("command"), py::arg("config") = py::none(), py::arg("seed") = py::none(), py::arg("out") = py::none(),
        "Runs a CLI subcommand; returns (exit_code, stdout, stderr).");
}

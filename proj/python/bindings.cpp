#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fockcm/center_of_mass.hpp"
#include "fockcm/config.hpp"
#include "fockcm/duhamel.hpp"
#include "fockcm/experiments.hpp"
#include "fockcm/fock.hpp"
#include "fockcm/grid.hpp"
#include "fockcm/io.hpp"
#include "fockcm/mixed_norms.hpp"
#include "fockcm/propagator.hpp"
#include "fockcm/random_field.hpp"
#include "fockcm/semiclassics.hpp"

namespace py = pybind11;
using namespace fockcm;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

CVec to_cvec(const CArray& a) { return CVec(a.data(), a.data() + a.size()); }

CArray to_carray(const CVec& v) {
    CArray a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

RArray to_rarray(const RVec& v) {
    RArray a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

void check_size(const CVec& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw py::value_error(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                              std::to_string(v.size()));
}

py::dict suite_dict(const SuiteResult& r) {
    py::dict metrics;
    for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
    py::dict tables;
    for (const auto& [stem, t] : r.tables) {
        py::dict tab;
        tab["columns"] = t.columns;
        tab["rows"] = t.rows;
        tables[py::str(stem)] = tab;
    }
    py::dict out;
    out["name"] = r.name;
    out["ok"] = r.ok();
    out["metrics"] = metrics;
    out["failures"] = r.failures;
    out["tables"] = tables;
    return out;
}

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

}  // namespace

PYBIND11_MODULE(fockcm, m) {
    m.doc() = "Bosonic Fock space with a center-of-mass representation, random potentials and Duhamel solvers";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int d, int M, double delta) {
                 GridSpec g{d, M, delta};
                 g.validate();
                 return g;
             }),
             py::arg("d") = 1, py::arg("M") = 32, py::arg("delta") = 1.0)
        .def_readonly("d", &GridSpec::d)
        .def_readonly("M", &GridSpec::M)
        .def_readonly("delta", &GridSpec::delta)
        .def_property_readonly("L", &GridSpec::L)
        .def_property_readonly("points", &GridSpec::points)
        .def_property_readonly("cell", &GridSpec::cell)
        .def("__eq__", &GridSpec::operator==)
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(d=" + std::to_string(g.d) + ", M=" + std::to_string(g.M) + ", delta=" + fmt(g.delta) + ")";
        });

    m.def("wavenumbers", [](const GridSpec& g) { return to_rarray(wavenumbers(g)); });
    m.def("lp_norm", [](const CArray& f, const GridSpec& g, double p) { return lp_norm(to_cvec(f), g, p); });

    py::class_<FockVector>(m, "FockVector")
        .def(py::init<const GridSpec&, int>(), py::arg("grid"), py::arg("nmax"))
        .def_readonly("grid", &FockVector::grid)
        .def_readonly("nmax", &FockVector::nmax)
        .def_readwrite("vacuum", &FockVector::vacuum)
        .def_readonly("dropped_mass", &FockVector::dropped_mass)
        .def("sector", [](const FockVector& u, int n) { return to_carray(u.sector(n)); }, py::arg("n"))
        .def(
            "set_sector",
            [](FockVector& u, int n, const CArray& a) {
                CVec v = to_cvec(a);
                check_size(v, u.sector_size(n), "set_sector");
                u.sector(n) = std::move(v);
            },
            py::arg("n"), py::arg("values"))
        .def("sector_size", &FockVector::sector_size);

    m.def("symmetrize", [](const CArray& t, int n, std::size_t P) { return to_carray(symmetrize(to_cvec(t), n, P)); });
    m.def("fock_norm", &fock_norm);
    m.def("inner", &inner);
    m.def("create", [](const CArray& f, const FockVector& u) { return create(to_cvec(f), u); });
    m.def("annihilate", [](const CArray& g, const FockVector& u) { return annihilate(to_cvec(g), u); });
    m.def(
        "field_op", [](const CArray& V, const FockVector& u, bool allow_complex) {
            return field_op(to_cvec(V), u, allow_complex);
        },
        py::arg("V"), py::arg("u"), py::arg("allow_complex") = false);
    m.def("number_weight", &number_weight);
    m.def("product_state", [](const CArray& phi, int n, const GridSpec& g, int nmax) {
        return product_state(to_cvec(phi), n, g, nmax);
    });

    py::class_<CMFockVector>(m, "CMFockVector")
        .def_readonly("grid", &CMFockVector::grid)
        .def_readonly("nmax", &CMFockVector::nmax)
        .def_readonly("refine", &CMFockVector::refine)
        .def_readonly("dropped_mass", &CMFockVector::dropped_mass)
        .def_property_readonly("nslots", &CMFockVector::nslots)
        .def("sector", [](const CMFockVector& v, int slot, int n) { return to_carray(v.sector(slot, n)); },
             py::arg("slot"), py::arg("n"))
        .def("vacuum", [](const CMFockVector& v, int slot) { return v.slots.at(static_cast<std::size_t>(slot)).vacuum; },
             py::arg("slot") = 0)
        .def("box_dims", &CMFockVector::box_dims);

    m.def("to_cm", &to_cm, py::arg("u"), py::arg("refine") = std::vector<int>{}, py::arg("xi") = RVec{});
    m.def("from_cm", &from_cm, py::arg("v"), py::arg("slot") = 0);
    m.def("cm_norm", &cm_norm);
    m.def("cm_inner", &cm_inner);
    m.def("ag_apply", [](const CArray& V, const CMFockVector& v) { return ag_apply(to_cvec(V), v); });
    m.def("ag_star_apply", [](const CArray& V, const CMFockVector& v) { return ag_star_apply(to_cvec(V), v); });
    m.def("mixed_norm", &mixed_norm, py::arg("v"), py::arg("p"), py::arg("q"));

    m.def(
        "evolve_free",
        [](const CArray& psi, const GridSpec& g, double t, const RVec& xi) {
            CVec v = to_cvec(psi);
            check_size(v, g.points(), "evolve_free");
            return to_carray(evolve_free(v, g, t, xi));
        },
        py::arg("psi"), py::arg("grid"), py::arg("t"), py::arg("xi") = RVec{});
    m.def("evolve_free_fock", &evolve_free_fock);
    m.def("wrap_time", [](const CArray& g, const GridSpec& grid) { return wrap_time(to_cvec(g), grid); });
    m.def("dispersive_ratio",
          [](const CArray& g, const GridSpec& grid, double t) { return dispersive_ratio(to_cvec(g), grid, t); });

    m.def("split_seed", &split_seed);
    m.def("white_noise", [](std::uint64_t seed, const GridSpec& g) {
        return to_rarray(sample_white_noise(seed, g).values);
    });

    py::enum_<ChiKind>(m, "ChiKind").value("hard", ChiKind::hard).value("exponential", ChiKind::exponential);
    m.def("chi_value", &chi_value, py::arg("kind"), py::arg("eps"), py::arg("n"));
    m.def("kappa_band", [](int p) {
        const KappaBand b = kappa_band(p);
        return py::make_tuple(b.k1, b.k2);
    });

    py::class_<HusimiField>(m, "HusimiField")
        .def_readonly("h", &HusimiField::h)
        .def_readonly("grid", &HusimiField::grid)
        .def_readonly("coarsen", &HusimiField::coarsen)
        .def_property_readonly("values", [](const HusimiField& f) { return to_rarray(f.values); })
        .def_property_readonly("x_nodes", &HusimiField::x_nodes)
        .def("mass", &HusimiField::mass);
    m.def(
        "husimi", [](const CMFockVector& v, double h, int coarsen) { return husimi(v, h, coarsen); },
        py::arg("v"), py::arg("h"), py::arg("coarsen") = 1);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("id", &ExperimentConfig::id)
        .def_readonly("seed", &ExperimentConfig::seed)
        .def_readonly("grid", &ExperimentConfig::grid)
        .def_readonly("trials", &ExperimentConfig::trials)
        .def("canonical_text", [](const ExperimentConfig& c) { return canonical_text(c); })
        .def("hash", [](const ExperimentConfig& c) { return config_hash(c); });
    m.def("parse_config", &config_from_text, py::arg("text"), "Parse TOML text; raises ConfigError with every violation.");
    m.def("load_config", &load_config, py::arg("path"));
    m.def("build_state", &build_state);
    m.def("build_potential", [](const ExperimentConfig& c) { return to_carray(build_potential(c)); });

    m.def("run_verify_ops", [](const ExperimentConfig& c) { return suite_dict(run_verify_ops_lab(c)); });
    m.def("run_verify_ineq", [](const ExperimentConfig& c) { return suite_dict(run_verify_ineq(c)); });
    m.def("run_verify_norms", [](const ExperimentConfig& c) { return suite_dict(run_verify_norms(c)); });
    m.def("run_mc_crosscheck", [](const ExperimentConfig& c) { return suite_dict(run_mc_crosscheck(c)); });
    m.def("run_solve", [](const ExperimentConfig& c) { return suite_dict(run_solve(c)); });
    m.def("run_truncate_sweep",
          [](const ExperimentConfig& c, const RVec& eps) { return suite_dict(run_truncate_sweep(c, eps)); });
}

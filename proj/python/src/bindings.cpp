#include "moma/aggregation.hpp"
#include "moma/benchmarks.hpp"
#include "moma/chain.hpp"
#include "moma/errors.hpp"
#include "moma/evaluation.hpp"
#include "moma/grid.hpp"
#include "moma/parallel.hpp"
#include "moma/runner.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace moma;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

MarkovRewardProcess mrp_from_dense(std::vector<Coord> lower, std::vector<Coord> upper,
                                   const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
                                   const py::array_t<double, py::array::c_style | py::array::forcecast>& cost,
                                   double alpha) {
    StateLattice lat(std::move(lower), std::move(upper));
    if (p.ndim() != 2 || static_cast<std::size_t>(p.shape(0)) != lat.size() ||
        static_cast<std::size_t>(p.shape(1)) != lat.size())
        throw DomainError("P must be an N x N array");
    const auto vals = from_numpy(p);
    return MarkovRewardProcess(lat, RowStochasticMatrix::from_dense(lat.size(), lat.size(), vals), from_numpy(cost),
                               alpha);
}

AggregationScheme scheme_for(const MarkovRewardProcess& mrp, double s, const std::vector<Coord>& origin,
                             const std::optional<std::vector<std::vector<Coord>>>& axes) {
    if (axes) {
        std::vector<AxisGrid> a;
        for (const auto& v : *axes)
            a.push_back(AxisGrid{v});
        return scheme_from_grid(mrp.lattice, CoarseGrid::from_axes(mrp.lattice, std::move(a), s));
    }
    GridOptions opt;
    opt.origin = origin;
    return make_scheme(mrp.lattice, s, opt);
}

py::dict gaps_dict(const GapSummary& g) {
    py::dict d;
    d["abs_gap"] = to_numpy(g.abs_gap);
    d["rel_gap"] = to_numpy(g.rel_gap);
    d["mean_rel"] = g.mean_rel;
    d["max_rel"] = g.max_rel;
    d["max_abs"] = g.max_abs;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Moment-matching aggregation for discounted Markov chains and MDPs";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

    m.def("set_thread_count", &set_thread_count, py::arg("threads"));

    py::class_<StateLattice>(m, "StateLattice")
        .def(py::init<std::vector<Coord>, std::vector<Coord>>(), py::arg("lower"), py::arg("upper"))
        .def_property_readonly("size", &StateLattice::size)
        .def_property_readonly("dims", &StateLattice::dims)
        .def("to_index", [](const StateLattice& l, const std::vector<Coord>& c) { return l.to_index(c); })
        .def("to_coords", [](const StateLattice& l, StateIndex i) { return l.to_coords(i); });

    py::class_<MarkovRewardProcess>(m, "Mrp")
        .def(py::init(&mrp_from_dense), py::arg("lower"), py::arg("upper"), py::arg("P"), py::arg("cost"),
             py::arg("alpha"))
        .def_property_readonly("size", &MarkovRewardProcess::size)
        .def_property_readonly("discount", [](const MarkovRewardProcess& p) { return p.discount; })
        .def_property_readonly("lattice", [](const MarkovRewardProcess& p) { return p.lattice; })
        .def_property_readonly("cost", [](const MarkovRewardProcess& p) { return to_numpy(p.cost); })
        .def("transition_matrix", [](const MarkovRewardProcess& p) {
            py::array_t<double> out({p.size(), p.size()});
            const auto d = p.P.to_dense();
            std::copy(d.begin(), d.end(), out.mutable_data());
            return out;
        });

    m.def("simple_rw", &build_simple_rw, py::arg("n"), py::arg("absorbing") = true, py::arg("alpha") = 0.9);
    m.def("two_point_chain", &build_two_point_chain, py::arg("n"), py::arg("alpha") = 0.9);
    m.def("reflecting_rw", &build_reflecting_rw, py::arg("n"), py::arg("seed"), py::arg("alpha") = 0.95);

    m.def(
        "grid_axes",
        [](std::vector<Coord> lower, std::vector<Coord> upper, double s, std::vector<Coord> origin) {
            GridOptions opt;
            opt.origin = std::move(origin);
            const auto g = build_grid(StateLattice(std::move(lower), std::move(upper)), s, opt);
            std::vector<std::vector<Coord>> axes;
            for (const auto& a : g.axes())
                axes.push_back(a.values);
            return axes;
        },
        py::arg("lower"), py::arg("upper"), py::arg("s") = 0.45, py::arg("origin") = std::vector<Coord>{});
    m.def(
        "meta_count_bound",
        [](std::vector<Coord> lower, std::vector<Coord> upper, double s) {
            return meta_count_bound(StateLattice(std::move(lower), std::move(upper)), s);
        },
        py::arg("lower"), py::arg("upper"), py::arg("s"));

    m.def(
        "exact_value", [](const MarkovRewardProcess& mrp) { return to_numpy(exact_value(mrp)); }, py::arg("mrp"));

    m.def(
        "evaluate",
        [](const MarkovRewardProcess& mrp, double s, std::vector<Coord> origin,
           std::optional<std::vector<std::vector<Coord>>> axes, bool exact) {
            const auto scheme = scheme_for(mrp, s, origin, axes);
            EvaluationOptions eo;
            eo.compute_exact = exact;
            const auto rep = moma_evaluate(mrp, scheme, eo);
            py::dict d;
            d["n_meta"] = scheme.meta_count();
            d["V_moma"] = to_numpy(rep.V_moma);
            d["R"] = to_numpy(rep.R);
            d["lift_consistency"] = rep.lift_consistency;
            if (rep.V_exact) {
                d["V_exact"] = to_numpy(*rep.V_exact);
                d["gaps"] = gaps_dict(*rep.gaps);
            }
            return d;
        },
        py::arg("mrp"), py::arg("s") = 0.45, py::arg("origin") = std::vector<Coord>{},
        py::arg("axes") = std::nullopt, py::arg("exact") = true);

    m.def(
        "first_moment_gap",
        [](const MarkovRewardProcess& mrp, double s, std::vector<Coord> origin) {
            return first_moment_gap(lifted_chain(mrp, scheme_for(mrp, s, origin, std::nullopt)));
        },
        py::arg("mrp"), py::arg("s") = 0.45, py::arg("origin") = std::vector<Coord>{});

    m.def(
        "verify_mstep_identity",
        [](const MarkovRewardProcess& mrp, int m) { return verify_mstep_identity(mrp, m); }, py::arg("mrp"),
        py::arg("m"));

    // Runs one configured experiment; keys as in the INI file ("section.key").
    m.def(
        "run",
        [](const std::map<std::string, std::string>& kv) {
            const auto out = run(parse_config(kv));
            const auto json = py::module_::import("json");
            return py::make_tuple(out.exit_code, json.attr("loads")(out.summary.dump()));
        },
        py::arg("config"));

    m.def("format_double", &format_double, py::arg("value"));
}

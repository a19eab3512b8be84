#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gbeam/beam.hpp"
#include "gbeam/cli.hpp"
#include "gbeam/error.hpp"
#include "gbeam/paraxial.hpp"
#include "gbeam/snell.hpp"
#include "gbeam/validate.hpp"

namespace py = pybind11;
using namespace gbeam;

namespace {

py::array_t<double> column(const RayPath& path, double (*get)(const RaySample&)) {
    py::array_t<double> out(static_cast<py::ssize_t>(path.size()));
    auto w = out.mutable_unchecked<1>();
    for (std::size_t k = 0; k < path.size(); ++k) w(static_cast<py::ssize_t>(k)) = get(path[k]);
    return out;
}

template <class T, class F>
py::array_t<double> field(const std::vector<T>& v, F get) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    auto w = out.mutable_unchecked<1>();
    for (std::size_t k = 0; k < v.size(); ++k) w(static_cast<py::ssize_t>(k)) = get(v[k]);
    return out;
}

TraceOptions options(double step) {
    TraceOptions o;
    o.step = step;
    return o;
}

std::string status_name(TraceStatus s) {
    switch (s) {
        case TraceStatus::Completed: return "completed";
        case TraceStatus::DomainExit: return "domain_exit";
        case TraceStatus::TimeLimit: return "time_limit";
        case TraceStatus::Reversed: return "reversed";
    }
    return "unknown";
}

py::dict report_dict(const OracleReport& r) {
    py::dict d;
    d["name"] = r.name;
    d["oracle"] = r.oracle;
    d["candidate"] = r.candidate;
    d["abs_error"] = r.abs_error;
    d["rel_error"] = r.rel_error;
    d["tolerance"] = r.tolerance;
    d["pass"] = r.pass;
    d["note"] = r.note;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ray tracing, paraxial spreading and Gaussian-beam amplitudes in stratified sound-speed profiles";

    static py::exception<Error> error(m, "GbeamError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    py::class_<SoundSpeedProfile>(m, "Profile")
        .def_static("constant", [](double c0) { return SoundSpeedProfile::constant(c0); }, py::arg("c0"))
        .def_static("linear", [](double c0, double g) { return SoundSpeedProfile::linear(c0, g); }, py::arg("c0"),
                    py::arg("gradient"))
        .def_static(
            "munk",
            [](double c0, double eps, double axis, double scale) {
                return SoundSpeedProfile::munk(c0, eps, axis, scale);
            },
            py::arg("c0"), py::arg("epsilon"), py::arg("axis"), py::arg("scale"))
        .def_static("cosh_duct", [](double c0, double axis, double w) { return SoundSpeedProfile::cosh_duct(c0, axis, w); },
                    py::arg("c0"), py::arg("axis"), py::arg("scale"))
        .def_static("sinh", [](double c0, double axis, double w) { return SoundSpeedProfile::sinh_profile(c0, axis, w); },
                    py::arg("c0"), py::arg("axis"), py::arg("scale"))
        .def_static("cos", [](double c0, double axis, double w) { return SoundSpeedProfile::cos_profile(c0, axis, w); },
                    py::arg("c0"), py::arg("axis"), py::arg("scale"))
        .def_static("sin", [](double c0, double axis, double w) { return SoundSpeedProfile::sin_profile(c0, axis, w); },
                    py::arg("c0"), py::arg("axis"), py::arg("scale"))
        .def_static("tabulated", &SoundSpeedProfile::tabulated, py::arg("depths"), py::arg("speeds"))
        .def_static("from_csv", &SoundSpeedProfile::from_csv, py::arg("path"))
        .def("eval",
             [](const SoundSpeedProfile& p, double z) {
                 const SspEval e = p.eval(z);
                 return py::make_tuple(e.c, e.dc, e.d2c);
             },
             py::arg("z"), "(c, c', c'') at depth z")
        .def("curvature", &SoundSpeedProfile::curvature, py::arg("z"))
        .def_property_readonly("name", &SoundSpeedProfile::name)
        .def_property_readonly("domain",
                               [](const SoundSpeedProfile& p) { return py::make_tuple(p.domain().lo, p.domain().hi); })
        .def("__repr__", [](const SoundSpeedProfile& p) { return "<Profile " + p.name() + ">"; });

    py::class_<Horizon>(m, "Horizon")
        .def_static("time", &Horizon::time, py::arg("t"))
        .def_static("arclength", &Horizon::arclength, py::arg("s"))
        .def_static("range", &Horizon::range, py::arg("r"))
        .def_readonly("value", &Horizon::value);

    py::class_<RayPath>(m, "Ray")
        .def("__len__", &RayPath::size)
        .def_property_readonly("status", [](const RayPath& p) { return status_name(p.status()); })
        .def_property_readonly("launch_angle", &RayPath::launch_angle)
        .def_property_readonly("t", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.state.t; }); })
        .def_property_readonly("s", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.state.s; }); })
        .def_property_readonly("r", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.state.r; }); })
        .def_property_readonly("z", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.state.z; }); })
        .def_property_readonly("c", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.ssp.c; }); })
        .def_property_readonly(
            "theta", [](const RayPath& p) { return column(p, [](const RaySample& s) { return s.state.elevation(); }); })
        .def("to_csv", [](const RayPath& p) {
            std::ostringstream out;
            write_csv(out, p);
            return out.str();
        });

    m.def("trace",
          [](const SoundSpeedProfile& p, double z0, double theta0, const Horizon& h, double r0, double step) {
              return trace(p, r0, z0, theta0, h, options(step));
          },
          py::arg("profile"), py::arg("z0"), py::arg("theta0"), py::arg("horizon"), py::arg("r0") = 0.0,
          py::arg("step") = kDefaultStep, "RK4 ray from (r0, z0); theta0 > 0 launches toward smaller z");

    m.def("propagate_extrinsic",
          [](const SoundSpeedProfile& p, const RayPath& path) {
              const auto v = propagate_extrinsic(p, path);
              py::dict d;
              d["q"] = field(v, [](const ExtrinsicSpreading& e) { return e.q; });
              d["p"] = field(v, [](const ExtrinsicSpreading& e) { return e.p; });
              return d;
          },
          py::arg("profile"), py::arg("ray"));
    m.def("propagate_jacobi",
          [](const SoundSpeedProfile& p, const RayPath& path) {
              const auto v = propagate_jacobi(p, path);
              py::dict d;
              d["ain"] = field(v, [](const IntrinsicSpreading& e) { return e.ain; });
              d["ain_dot"] = field(v, [](const IntrinsicSpreading& e) { return e.ain_dot; });
              return d;
          },
          py::arg("profile"), py::arg("ray"));
    m.def("propagate_coupled",
          [](const SoundSpeedProfile& p, const RayPath& path) {
              const auto v = propagate_intrinsic_coupled(p, path);
              py::dict d;
              d["qt"] = field(v, [](const CoupledSpreading& e) { return e.qt; });
              d["pt"] = field(v, [](const CoupledSpreading& e) { return e.pt; });
              return d;
          },
          py::arg("profile"), py::arg("ray"));
    m.def("caustics",
          [](const SoundSpeedProfile& p, const RayPath& path) {
              py::list out;
              for (const CausticEvent& c : detect_caustics(propagate_jacobi(p, path), path)) {
                  py::dict d;
                  d["index"] = c.index;
                  d["t"] = c.t;
                  d["s"] = c.s;
                  d["r"] = c.r;
                  d["z"] = c.z;
                  out.append(d);
              }
              return out;
          },
          py::arg("profile"), py::arg("ray"), "zeros of ain along the ray");
    m.def("cz_distance",
          [](const SoundSpeedProfile& p, double z) {
              const CzDistance cz = cz_distance(p, z);
              py::dict d;
              d["half_wavelength"] = cz.half_wavelength;
              d["crude"] = cz.crude ? py::cast(*cz.crude) : py::none();
              d["exact"] = cz.exact ? py::cast(*cz.exact) : py::none();
              return d;
          },
          py::arg("profile"), py::arg("z"));
    m.def("spreading_snell",
          [](const SoundSpeedProfile& p, double z0, double theta0, double z) {
              const SnellSpreading s = spreading_snell(p, z0, theta0, z);
              return py::make_tuple(s.q, s.ain, s.theta);
          },
          py::arg("profile"), py::arg("z0"), py::arg("theta0"), py::arg("z"), "(q, ain, theta) on the first leg");
    m.def("range_integral", &range_integral, py::arg("profile"), py::arg("z0"), py::arg("theta0"), py::arg("z"),
          py::arg("turns") = 0);
    m.def("fd_spreading",
          [](const SoundSpeedProfile& p, double z0, double theta0, double t) { return fd_spreading(p, z0, theta0, t); },
          py::arg("profile"), py::arg("z0"), py::arg("theta0"), py::arg("t"));
    m.def("curvature_fd", [](const SoundSpeedProfile& p, double z) { return curvature_fd(p, z); }, py::arg("profile"),
          py::arg("z"));
    m.def("identity_suite",
          [](const SoundSpeedProfile& p, double z0, const std::vector<double>& angles, const Horizon& h) {
              py::list out;
              for (const OracleReport& r : identity_suite(p, z0, angles, h)) out.append(report_dict(r));
              return out;
          },
          py::arg("profile"), py::arg("z0"), py::arg("angles"), py::arg("horizon"));

    m.def("run_cli",
          [](const std::string& subcommand, const std::filesystem::path& scenario,
             std::optional<std::filesystem::path> out_dir, unsigned threads) {
              cli::RunOptions opt;
              opt.out_dir = std::move(out_dir);
              opt.threads = threads;
              std::ostringstream out, err;
              int status;
              try {
                  status = cli::run(subcommand, cli::load_scenario(scenario), opt, out, err);
              } catch (const Error& e) {
                  err << e.what() << '\n';
                  status = cli::kExitConfig;
              }
              return py::make_tuple(status, out.str(), err.str());
          },
          py::arg("subcommand"), py::arg("scenario"), py::arg("out_dir") = py::none(), py::arg("threads") = 0,
          "(exit status, stdout, stderr) of one CLI subcommand");
}

// Python bindings: field transforms, GRF sampling, norms, targets, and the
// operator itself (forward, certificates, training, checkpoints).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nolab/rng.hpp"
#include "nolab/sobolev.hpp"
#include "nolab/training.hpp"

namespace py = pybind11;
using namespace nolab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// arrays are (channels, n) for d=1 and (channels, n, n) for d=2
Field to_field(const Array& a, double length) {
    if (a.ndim() != 2 && a.ndim() != 3)
        throw py::value_error("expected array of shape (channels, n) or (channels, n, n)");
    const int dim = static_cast<int>(a.ndim()) - 1;
    const int n = static_cast<int>(a.shape(1));
    if (dim == 2 && a.shape(2) != n) throw py::value_error("2D fields must be square");
    const GridSpec g = make_grid(dim, n, length);
    Field f(g, static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + f.values.size(), f.values.begin());
    return f;
}

Array from_field(const Field& f) {
    std::vector<py::ssize_t> shape = {f.channels, f.grid.n};
    if (f.grid.dim == 2) shape.push_back(f.grid.n);
    Array out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

struct PyOperator {
    NeuralOperator op;

    static PyOperator build(int dim, int n, double length, int in_channels,
                            int out_channels, int d_v, int layers,
                            const std::string& kernel, int k_max,
                            const std::string& activation, double init_scale,
                            std::uint64_t seed) {
        OperatorConfig cfg;
        cfg.grid = make_grid(dim, n, length);
        cfg.in_channels = in_channels;
        cfg.out_channels = out_channels;
        cfg.d_v = d_v;
        cfg.layers = layers;
        if (kernel == "spectral")
            cfg.kernel = KernelKind::spectral;
        else if (kernel == "dense")
            cfg.kernel = KernelKind::dense;
        else
            throw py::value_error("kernel must be 'spectral' or 'dense'");
        cfg.k_max = k_max;
        cfg.activation = activation_from_name(activation);
        cfg.init_scale = init_scale;
        return {build_operator(cfg, seed)};
    }

    Array call(const Array& u) const { return from_field(forward(op, to_field(u, op.grid.length))); }

    py::dict lipschitz() const {
        const LipschitzCert cert = lipschitz_cert(op);
        py::dict d;
        d["product"] = cert.product;
        d["c0"] = cert.c0;
        d["lift"] = cert.lift_l;
        d["project"] = cert.project_l;
        d["layers"] = cert.layer_l;
        return d;
    }

    std::vector<double> parameters() const { return get_parameters(op); }
    void set_params(const std::vector<double>& p) { set_parameters(op, p); }
    void save(const std::string& path) const { save_checkpoint(op, path); }
    static PyOperator load(const std::string& path) { return {load_checkpoint(path)}; }
    PyOperator rescaled(double q) const { return {rescale_to_contraction(op, q)}; }

    py::tuple fixed_point(const Array& u0, double tol, int max_iter) const {
        const FixedPointResult r =
            iterate_to_fixed_point(op, to_field(u0, op.grid.length), tol, max_iter);
        return py::make_tuple(from_field(r.fixed_point), r.converged, r.iterations);
    }
};

TargetOperator make_target(const std::string& kind, double tau, int band_limit) {
    return {target_from_name(kind), tau, band_limit};
}

}  // namespace

PYBIND11_MODULE(_nolab, m) {
    m.doc() = "neural-operator numerics on periodic grids";

    m.def(
        "sample_grf",
        [](int dim, int n, double length, double alpha, double amplitude,
           std::uint64_t seed, int channels) {
            return from_field(
                sample_grf({alpha, amplitude, seed}, make_grid(dim, n, length), channels));
        },
        py::arg("dim"), py::arg("n"), py::arg("length") = 1.0, py::arg("alpha") = 2.5,
        py::arg("amplitude") = 1.0, py::arg("seed") = 0, py::arg("channels") = 1);

    m.def(
        "l2_norm", [](const Array& a, double length) { return l2_norm(to_field(a, length)); },
        py::arg("field"), py::arg("length") = 1.0);
    m.def(
        "hs_norm",
        [](const Array& a, double s, double length) { return hs_norm(to_field(a, length), s); },
        py::arg("field"), py::arg("s"), py::arg("length") = 1.0);
    m.def(
        "linf_norm", [](const Array& a) { return linf_norm(to_field(a, 1.0)); },
        py::arg("field"));

    m.def(
        "apply_target",
        [](const std::string& kind, const Array& u, double length, double tau,
           int band_limit) {
            return from_field(apply_target(make_target(kind, tau, band_limit),
                                           to_field(u, length)));
        },
        py::arg("kind"), py::arg("field"), py::arg("length") = 1.0, py::arg("tau") = 0.01,
        py::arg("band_limit") = -1);

    m.def(
        "resample",
        [](const Array& u, int new_n, double length) {
            return from_field(resample(to_field(u, length), new_n));
        },
        py::arg("field"), py::arg("new_n"), py::arg("length") = 1.0);

    py::class_<PyOperator>(m, "Operator")
        .def_static("build", &PyOperator::build, py::arg("dim") = 1, py::arg("n") = 32,
                    py::arg("length") = 1.0, py::arg("in_channels") = 1,
                    py::arg("out_channels") = 1, py::arg("d_v") = 4, py::arg("layers") = 2,
                    py::arg("kernel") = "spectral", py::arg("k_max") = 4,
                    py::arg("activation") = "tanh", py::arg("init_scale") = 1.0,
                    py::arg("seed") = 0)
        .def_static("load", &PyOperator::load, py::arg("path"))
        .def("__call__", &PyOperator::call, py::arg("field"))
        .def("lipschitz", &PyOperator::lipschitz)
        .def("parameters", &PyOperator::parameters)
        .def("set_parameters", &PyOperator::set_params, py::arg("values"))
        .def("save", &PyOperator::save, py::arg("path"))
        .def("rescaled", &PyOperator::rescaled, py::arg("q"))
        .def("fixed_point", &PyOperator::fixed_point, py::arg("u0"), py::arg("tol") = 1e-10,
             py::arg("max_iter") = 10000);

    m.def(
        "fit",
        [](const PyOperator& op, const std::vector<Array>& inputs,
           const std::vector<Array>& targets, int steps, int batch_size, double lr,
           const std::string& optimizer, std::uint64_t seed) {
            if (inputs.size() != targets.size() || inputs.empty())
                throw py::value_error("inputs and targets must be equal-length and non-empty");
            Dataset ds;
            for (size_t i = 0; i < inputs.size(); ++i) {
                ds.inputs.push_back(to_field(inputs[i], op.op.grid.length));
                ds.targets.push_back(to_field(targets[i], op.op.grid.length));
            }
            TrainConfig cfg;
            cfg.steps = steps;
            cfg.batch_size = batch_size;
            cfg.learning_rate = lr;
            if (optimizer == "adam")
                cfg.optimizer = OptimizerKind::adam;
            else if (optimizer == "sgd")
                cfg.optimizer = OptimizerKind::sgd;
            else
                throw py::value_error("optimizer must be 'adam' or 'sgd'");
            cfg.seed = seed;
            const TrainResult res = train(op.op, ds, cfg);
            return py::make_tuple(PyOperator{res.op}, res.history, res.diverged);
        },
        py::arg("op"), py::arg("inputs"), py::arg("targets"), py::arg("steps") = 1000,
        py::arg("batch_size") = 8, py::arg("lr") = 1e-3, py::arg("optimizer") = "adam",
        py::arg("seed") = 0);
}

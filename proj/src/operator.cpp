#include "nolab/operator.hpp"

#include <cmath>
#include <stdexcept>

#include "nolab/rng.hpp"

namespace nolab {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

MapMat as_matrix(Field& f) { return {f.values.data(), f.channels, f.grid.total()}; }
ConstMapMat as_matrix(const Field& f) {
    return {f.values.data(), f.channels, f.grid.total()};
}

Field apply_affine(const AffineMap& m, const Field& v) {
    Field out(v.grid, static_cast<int>(m.w.rows()));
    as_matrix(out) = (m.w * as_matrix(v)).colwise() + m.b;
    return out;
}

bool kernel_grid_ok(const SpectralKernel& k, const GridSpec& g) {
    return g.dim == k.dim && g.n / 2 > k.k_max;
}

// Applies the spectral multipliers (or their conjugate transposes) and
// returns the real part; modes |k| > k_max are zeroed.
Field apply_spectral(const SpectralKernel& kern, const Field& v, bool adjoint) {
    if (!kernel_grid_ok(kern, v.grid))
        throw std::invalid_argument("apply_kernel: grid incompatible with spectral kernel");
    if (v.channels != kern.d_v)
        throw std::invalid_argument("apply_kernel: channel mismatch");
    const Spectrum in = dft(v);
    Spectrum out(v.grid, v.channels);
    const int d_v = kern.d_v;
    const int n = v.grid.n;
    int k[2];
    for (int m = 0; m < kern.mode_count(); ++m) {
        kern.mode_freq(m, k);
        const int j = kern.dim == 1
                          ? index_of_freq(k[0], n)
                          : index_of_freq(k[0], n) * n + index_of_freq(k[1], n);
        for (int a = 0; a < d_v; ++a) {
            std::complex<double> acc = 0.0;
            for (int b = 0; b < d_v; ++b) {
                const std::complex<double> r = adjoint ? std::conj(kern.at(m, b, a))
                                                       : kern.at(m, a, b);
                acc += r * in.at(b, j);
            }
            out.at(a, j) = acc;
        }
    }
    return idft(out);
}

void interleave(const Field& v, Eigen::VectorXd& out) {
    const int N = v.grid.total();
    out.resize(static_cast<Eigen::Index>(N) * v.channels);
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < v.channels; ++c)
            out[static_cast<Eigen::Index>(j) * v.channels + c] = v.at(c, j);
}

Field deinterleave(const GridSpec& g, int channels, const Eigen::VectorXd& in) {
    Field v(g, channels);
    const int N = g.total();
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < channels; ++c)
            v.at(c, j) = in[static_cast<Eigen::Index>(j) * channels + c];
    return v;
}

Field apply_dense(const DenseKernel& kern, const Field& v, bool transpose) {
    if (v.grid != kern.grid)
        throw std::invalid_argument("apply_kernel: grid mismatch with dense kernel");
    if (v.channels != kern.d_v)
        throw std::invalid_argument("apply_kernel: channel mismatch");
    Eigen::VectorXd x;
    interleave(v, x);
    Eigen::VectorXd y = transpose ? Eigen::VectorXd(kern.matrix.transpose() * x)
                                  : Eigen::VectorXd(kern.matrix * x);
    y *= v.grid.cell_volume();
    return deinterleave(v.grid, v.channels, y);
}

double spectral_kernel_opnorm(const SpectralKernel& k) {
    double worst = 0.0;
    Eigen::MatrixXcd r(k.d_v, k.d_v);
    for (int m = 0; m < k.mode_count(); ++m) {
        for (int a = 0; a < k.d_v; ++a)
            for (int b = 0; b < k.d_v; ++b) r(a, b) = k.at(m, a, b);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
        worst = std::max(worst, svd.singularValues()(0));
    }
    return worst;
}

double dense_kernel_opnorm(const DenseKernel& k) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(k.matrix);
    return k.grid.cell_volume() * svd.singularValues()(0);
}

double matrix_opnorm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double uniform(Rng& rng, double a) {
    std::uniform_real_distribution<double> d(-a, a);
    return d(rng);
}

}  // namespace

double activate(ActivationKind k, double x) {
    switch (k) {
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::identity: return x;
    }
    return x;
}

double activate_deriv(ActivationKind k, double x) {
    switch (k) {
        case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;  // subgradient 0 at 0
        case ActivationKind::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::identity: return 1.0;
    }
    return 1.0;
}

std::string activation_name(ActivationKind k) {
    switch (k) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::identity: return "identity";
    }
    return "identity";
}

ActivationKind activation_from_name(const std::string& s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "tanh") return ActivationKind::tanh;
    if (s == "identity") return ActivationKind::identity;
    throw std::invalid_argument("unknown activation: " + s);
}

void SpectralKernel::mode_freq(int mode, int* k) const {
    const int m = modes_per_axis();
    if (dim == 1) {
        k[0] = mode - k_max;
    } else {
        k[0] = mode / m - k_max;
        k[1] = mode % m - k_max;
    }
}

NeuralOperator build_operator(const OperatorConfig& cfg, std::uint64_t seed) {
    if (cfg.d_v < 1) throw std::invalid_argument("build_operator: d_v must be >= 1");
    if (cfg.layers < 1) throw std::invalid_argument("build_operator: layers must be >= 1");
    if (cfg.in_channels < 1 || cfg.out_channels < 1)
        throw std::invalid_argument("build_operator: channels must be >= 1");
    if (cfg.kernel == KernelKind::spectral && cfg.k_max >= cfg.grid.n / 2)
        throw std::invalid_argument("build_operator: k_max must be < n/2");
    if (cfg.kernel == KernelKind::spectral && cfg.k_max < 0)
        throw std::invalid_argument("build_operator: k_max must be >= 0");

    Rng rng(derive_seed(seed, 0xB01D));
    NeuralOperator op;
    op.grid = cfg.grid;
    op.in_channels = cfg.in_channels;
    op.out_channels = cfg.out_channels;
    op.d_v = cfg.d_v;

    auto init_mat = [&](Eigen::MatrixXd& m, int rows, int cols, int fan_in) {
        m.resize(rows, cols);
        const double a = fan_in > 0 ? cfg.init_scale / std::sqrt(double(fan_in)) : 0.0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = uniform(rng, a);
    };

    init_mat(op.lift.w, cfg.d_v, cfg.in_channels, cfg.in_channels);
    op.lift.b = Eigen::VectorXd::Zero(cfg.d_v);

    const int N = cfg.grid.total();
    for (int l = 0; l < cfg.layers; ++l) {
        LayerParams layer;
        layer.activation = cfg.activation;
        init_mat(layer.w, cfg.d_v, cfg.d_v, cfg.d_v);
        layer.bias = Eigen::VectorXd::Zero(cfg.d_v);
        layer.kernel.kind = cfg.kernel;
        if (cfg.kernel == KernelKind::spectral) {
            SpectralKernel& k = layer.kernel.spectral;
            k.dim = cfg.grid.dim;
            k.d_v = cfg.d_v;
            k.k_max = cfg.k_max;
            k.multipliers.assign(static_cast<size_t>(k.mode_count()) * cfg.d_v * cfg.d_v, 0.0);
            const double a = cfg.init_scale / std::sqrt(double(cfg.d_v));
            std::vector<bool> filled(k.mode_count(), false);
            int kv[2];
            for (int m = 0; m < k.mode_count(); ++m) {
                if (filled[m]) continue;
                k.mode_freq(m, kv);
                int pm;  // index of the -k mode in the enumeration
                if (k.dim == 1) {
                    pm = -kv[0] + cfg.k_max;
                } else {
                    pm = (-kv[0] + cfg.k_max) * k.modes_per_axis() + (-kv[1] + cfg.k_max);
                }
                if (pm == m) {
                    for (int r = 0; r < cfg.d_v; ++r)
                        for (int c = 0; c < cfg.d_v; ++c)
                            k.at(m, r, c) = uniform(rng, a);  // self-conjugate: real
                } else {
                    for (int r = 0; r < cfg.d_v; ++r)
                        for (int c = 0; c < cfg.d_v; ++c) {
                            const double re = uniform(rng, a);
                            const double im = uniform(rng, a);
                            k.at(m, r, c) = {re, im};
                            k.at(pm, r, c) = {re, -im};
                        }
                    filled[pm] = true;
                }
                filled[m] = true;
            }
        } else {
            DenseKernel& k = layer.kernel.dense;
            k.d_v = cfg.d_v;
            k.grid = cfg.grid;
            init_mat(k.matrix, N * cfg.d_v, N * cfg.d_v, cfg.d_v);
        }
        op.layers.push_back(std::move(layer));
    }

    init_mat(op.project.w, cfg.out_channels, cfg.d_v, cfg.d_v);
    op.project.b = Eigen::VectorXd::Zero(cfg.out_channels);
    return op;
}

Field apply_kernel(const KernelSpec& kernel, const Field& v) {
    return kernel.kind == KernelKind::spectral ? apply_spectral(kernel.spectral, v, false)
                                               : apply_dense(kernel.dense, v, false);
}

Field apply_layer(const LayerParams& layer, const Field& v) {
    Field z = apply_kernel(layer.kernel, v);
    as_matrix(z).colwise() += layer.bias;
    Field next(v.grid, v.channels);
    as_matrix(next) = layer.w * as_matrix(v);
    for (size_t t = 0; t < next.values.size(); ++t)
        next.values[t] += activate(layer.activation, z.values[t]);
    return next;
}

Field forward_traced(const NeuralOperator& op, const Field& u, ForwardTrace& trace) {
    if (u.channels != op.in_channels)
        throw std::invalid_argument("forward: input channel mismatch");
    trace.input = u;
    trace.v.clear();
    trace.z.clear();
    trace.v.push_back(apply_affine(op.lift, u));
    for (size_t i = 0; i < op.layers.size(); ++i) {
        const LayerParams& layer = op.layers[i];
        const Field& vi = trace.v.back();
        Field z = apply_kernel(layer.kernel, vi);
        as_matrix(z).colwise() += layer.bias;
        Field next(vi.grid, op.d_v);
        as_matrix(next) = layer.w * as_matrix(vi);
        for (size_t t = 0; t < next.values.size(); ++t)
            next.values[t] += activate(layer.activation, z.values[t]);
        if (!field_finite(next))
            throw std::runtime_error("forward: non-finite state after layer " +
                                     std::to_string(i));
        trace.z.push_back(std::move(z));
        trace.v.push_back(std::move(next));
    }
    trace.output = apply_affine(op.project, trace.v.back());
    if (!field_finite(trace.output)) throw std::runtime_error("forward: non-finite output");
    return trace.output;
}

Field forward(const NeuralOperator& op, const Field& u) {
    ForwardTrace trace;
    return forward_traced(op, u, trace);
}

ParamLayout param_layout(const NeuralOperator& op) {
    ParamLayout layout;
    auto add = [&](const std::string& name, size_t count) {
        layout.segments.emplace_back(name, count);
        layout.total += count;
    };
    add("lift.w", op.lift.w.size());
    add("lift.b", op.lift.b.size());
    for (size_t i = 0; i < op.layers.size(); ++i) {
        const std::string p = "layer" + std::to_string(i) + ".";
        add(p + "w", op.layers[i].w.size());
        add(p + "b", op.layers[i].bias.size());
        if (op.layers[i].kernel.kind == KernelKind::spectral)
            add(p + "kernel", op.layers[i].kernel.spectral.multipliers.size() * 2);
        else
            add(p + "kernel", op.layers[i].kernel.dense.matrix.size());
    }
    add("project.w", op.project.w.size());
    add("project.b", op.project.b.size());
    return layout;
}

namespace {

void copy_mat(const Eigen::MatrixXd& m, double*& out) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) *out++ = m(r, c);
}
void copy_vec(const Eigen::VectorXd& v, double*& out) {
    for (Eigen::Index i = 0; i < v.size(); ++i) *out++ = v(i);
}
void load_mat(Eigen::MatrixXd& m, const double*& in) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = *in++;
}
void load_vec(Eigen::VectorXd& v, const double*& in) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = *in++;
}

}  // namespace

std::vector<double> get_parameters(const NeuralOperator& op) {
    std::vector<double> p(param_layout(op).total);
    double* out = p.data();
    copy_mat(op.lift.w, out);
    copy_vec(op.lift.b, out);
    for (const LayerParams& l : op.layers) {
        copy_mat(l.w, out);
        copy_vec(l.bias, out);
        if (l.kernel.kind == KernelKind::spectral) {
            for (const auto& z : l.kernel.spectral.multipliers) {
                *out++ = z.real();
                *out++ = z.imag();
            }
        } else {
            copy_mat(l.kernel.dense.matrix, out);
        }
    }
    copy_mat(op.project.w, out);
    copy_vec(op.project.b, out);
    return p;
}

void set_parameters(NeuralOperator& op, std::span<const double> p) {
    if (p.size() != param_layout(op).total)
        throw std::invalid_argument("set_parameters: size mismatch");
    const double* in = p.data();
    load_mat(op.lift.w, in);
    load_vec(op.lift.b, in);
    for (LayerParams& l : op.layers) {
        load_mat(l.w, in);
        load_vec(l.bias, in);
        if (l.kernel.kind == KernelKind::spectral) {
            for (auto& z : l.kernel.spectral.multipliers) {
                const double re = *in++;
                const double im = *in++;
                z = {re, im};
            }
        } else {
            load_mat(l.kernel.dense.matrix, in);
        }
    }
    load_mat(op.project.w, in);
    load_vec(op.project.b, in);
}

BackwardResult backward(const NeuralOperator& op, const ForwardTrace& trace,
                        const Field& output_adjoint, bool want_input_adjoint) {
    const int N = trace.input.grid.total();
    const int d_v = op.d_v;
    const size_t L = op.layers.size();

    BackwardResult result;
    result.grad.assign(param_layout(op).total, 0.0);

    // locate segments in the flat gradient
    const ParamLayout layout = param_layout(op);
    std::vector<size_t> offsets(layout.segments.size());
    size_t off = 0;
    for (size_t i = 0; i < layout.segments.size(); ++i) {
        offsets[i] = off;
        off += layout.segments[i].second;
    }
    auto seg = [&](size_t idx) { return result.grad.data() + offsets[idx]; };

    const auto dY = as_matrix(output_adjoint);
    const auto vL = as_matrix(trace.v[L]);

    // projection
    {
        Eigen::MatrixXd gw = dY * vL.transpose();
        Eigen::VectorXd gb = dY.rowwise().sum();
        double* out = seg(layout.segments.size() - 2);
        copy_mat(gw, out);
        out = seg(layout.segments.size() - 1);
        copy_vec(gb, out);
    }
    Field dv(trace.input.grid, d_v);
    as_matrix(dv) = op.project.w.transpose() * dY;

    for (size_t i = L; i-- > 0;) {
        const LayerParams& layer = op.layers[i];
        const Field& vi = trace.v[i];
        const Field& zi = trace.z[i];
        const Field& dvout = dv;

        Field dz(trace.input.grid, d_v);
        for (size_t t = 0; t < dz.values.size(); ++t)
            dz.values[t] = activate_deriv(layer.activation, zi.values[t]) * dvout.values[t];

        const size_t base = 2 + i * 3;  // segment index of layer{i}.w
        {
            Eigen::MatrixXd gw = as_matrix(dvout) * as_matrix(vi).transpose();
            Eigen::VectorXd gb = as_matrix(dz).rowwise().sum();
            double* out = seg(base);
            copy_mat(gw, out);
            out = seg(base + 1);
            copy_vec(gb, out);
        }

        Field dv_kernel;
        if (layer.kernel.kind == KernelKind::spectral) {
            const SpectralKernel& kern = layer.kernel.spectral;
            const Spectrum gz = dft(dz);
            const Spectrum cv = dft(vi);
            double* gk = seg(base + 2);
            const int n = vi.grid.n;
            int kv[2];
            for (int m = 0; m < kern.mode_count(); ++m) {
                kern.mode_freq(m, kv);
                const int j = kern.dim == 1
                                  ? index_of_freq(kv[0], n)
                                  : index_of_freq(kv[0], n) * n + index_of_freq(kv[1], n);
                for (int a = 0; a < d_v; ++a)
                    for (int b = 0; b < d_v; ++b) {
                        const std::complex<double> g =
                            double(N) * gz.at(a, j) * std::conj(cv.at(b, j));
                        const size_t idx =
                            2 * ((static_cast<size_t>(m) * d_v + a) * d_v + b);
                        gk[idx] += g.real();
                        gk[idx + 1] += g.imag();
                    }
            }
            dv_kernel = apply_spectral(kern, dz, /*adjoint=*/true);
        } else {
            const DenseKernel& kern = layer.kernel.dense;
            Eigen::VectorXd vx, gx;
            interleave(vi, vx);
            interleave(dz, gx);
            const double h = vi.grid.cell_volume();
            Eigen::Map<RowMat> gm(seg(base + 2), kern.matrix.rows(), kern.matrix.cols());
            gm += h * gx * vx.transpose();
            Eigen::VectorXd dvx = h * (kern.matrix.transpose() * gx);
            dv_kernel = deinterleave(vi.grid, d_v, dvx);
        }

        Field dnext(trace.input.grid, d_v);
        as_matrix(dnext) = layer.w.transpose() * as_matrix(dvout) + as_matrix(dv_kernel);
        dv = std::move(dnext);
    }

    // lift
    {
        Eigen::MatrixXd gw = as_matrix(dv) * as_matrix(trace.input).transpose();
        Eigen::VectorXd gb = as_matrix(dv).rowwise().sum();
        double* out = seg(0);
        copy_mat(gw, out);
        out = seg(1);
        copy_vec(gb, out);
    }
    if (want_input_adjoint) {
        result.input_adjoint = Field(trace.input.grid, op.in_channels);
        as_matrix(result.input_adjoint) = op.lift.w.transpose() * as_matrix(dv);
    }
    for (double g : result.grad)
        if (!std::isfinite(g)) throw std::runtime_error("backward: non-finite gradient");
    return result;
}

LipschitzCert lipschitz_cert(const NeuralOperator& op) {
    LipschitzCert cert;
    cert.lift_l = matrix_opnorm(op.lift.w);
    cert.project_l = matrix_opnorm(op.project.w);
    cert.product = cert.lift_l * cert.project_l;
    for (const LayerParams& l : op.layers) {
        const double kn = l.kernel.kind == KernelKind::spectral
                              ? spectral_kernel_opnorm(l.kernel.spectral)
                              : dense_kernel_opnorm(l.kernel.dense);
        const double c = matrix_opnorm(l.w) + activation_lipschitz(l.activation) * kn;
        cert.layer_l.push_back(c);
        cert.product *= c;
    }
    cert.c0 = l2_norm(forward(op, Field(op.grid, op.in_channels)));
    return cert;
}

NeuralOperator rescale_to_contraction(const NeuralOperator& op, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("rescale_to_contraction: q must be in (0,1)");
    if (op.in_channels != op.out_channels)
        throw std::invalid_argument("rescale_to_contraction: operator is not a self-map");
    const LipschitzCert cert = lipschitz_cert(op);
    if (!(cert.product > 0.0))
        throw std::invalid_argument("rescale_to_contraction: certificate product is zero");
    NeuralOperator out = op;
    out.project.w *= q / cert.product;
    return out;
}

FixedPointResult iterate_to_fixed_point(const NeuralOperator& op, const Field& u0, double tol,
                                        int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("iterate_to_fixed_point: tol must be > 0");
    if (op.in_channels != op.out_channels)
        throw std::invalid_argument("iterate_to_fixed_point: operator is not a self-map");
    const double q = lipschitz_cert(op).product;
    // a-posteriori stopping: ||u_n - u*|| <= q/(1-q) * ||u_{n+1} - u_n||
    const double step_tol = (q > 0.0 && q < 1.0) ? tol * (1.0 - q) / q : tol;

    FixedPointResult res;
    std::vector<Field> iterates;
    iterates.push_back(u0);
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        Field next = forward(op, iterates.back());
        const double step = l2_norm(field_add(next, iterates.back(), -1.0));
        const double nn = l2_norm(next);
        iterates.push_back(std::move(next));
        if (nn > 1e12) break;  // divergence guard
        if (step <= step_tol) {
            converged = true;
            break;
        }
    }
    res.converged = converged;
    res.iterations = static_cast<int>(iterates.size()) - 1;
    res.fixed_point = iterates.back();
    res.iterate_norms.reserve(iterates.size());
    for (const Field& u : iterates)
        res.iterate_norms.push_back(l2_norm(field_add(u, res.fixed_point, -1.0)));
    return res;
}

}  // namespace nolab

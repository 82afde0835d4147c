#include "nolab/training.hpp"

#include <cmath>
#include <stdexcept>

#include "binio.hpp"
#include "nolab/rng.hpp"
#include "nolab/sobolev.hpp"

namespace nolab {

std::string target_name(TargetKind k) {
    switch (k) {
        case TargetKind::bessel_inverse: return "bessel_inverse";
        case TargetKind::antiderivative: return "antiderivative";
        case TargetKind::smoothed_tanh: return "smoothed_tanh";
    }
    return "bessel_inverse";
}

TargetKind target_from_name(const std::string& s) {
    if (s == "bessel_inverse" || s == "bessel-inverse") return TargetKind::bessel_inverse;
    if (s == "antiderivative") return TargetKind::antiderivative;
    if (s == "smoothed_tanh" || s == "smoothed-tanh") return TargetKind::smoothed_tanh;
    throw std::invalid_argument("unknown target: " + s);
}

namespace {

bool mode_in_band(const GridSpec& g, int j, int band) {
    int k[2] = {0, 0};
    if (g.dim == 1) {
        k[0] = freq_of_index(j, g.n);
    } else {
        k[0] = freq_of_index(j / g.n, g.n);
        k[1] = freq_of_index(j % g.n, g.n);
    }
    for (int a = 0; a < g.dim; ++a)
        if (std::abs(k[a]) > band) return false;
    return true;
}

void band_limit_spectrum(Spectrum& s, int band) {
    const int N = s.grid.total();
    for (int c = 0; c < s.channels; ++c)
        for (int j = 0; j < N; ++j)
            if (!mode_in_band(s.grid, j, band)) s.at(c, j) = 0.0;
}

}  // namespace

Field apply_target(const TargetOperator& t, const Field& u) {
    Spectrum s = [&] {
        switch (t.kind) {
            case TargetKind::bessel_inverse: {
                Spectrum sp = dft(u);
                const int N = u.grid.total();
                for (int c = 0; c < u.channels; ++c)
                    for (int j = 0; j < N; ++j)
                        sp.at(c, j) /= 1.0 + mode_omega2(u.grid, j);
                return sp;
            }
            case TargetKind::antiderivative: {
                if (u.grid.dim != 1)
                    throw std::invalid_argument("antiderivative target requires dim=1");
                Spectrum sp = dft(u);
                const int n = u.grid.n;
                const double f = 2.0 * std::numbers::pi / u.grid.length;
                for (int c = 0; c < u.channels; ++c)
                    for (int j = 0; j < n; ++j) {
                        const int k = freq_of_index(j, n);
                        if (k == 0)
                            sp.at(c, j) = 0.0;  // zero-mean convention
                        else
                            sp.at(c, j) /= std::complex<double>(0.0, f * k);
                    }
                return sp;
            }
            case TargetKind::smoothed_tanh: {
                Field th = u;
                for (double& v : th.values) v = std::tanh(v);
                Spectrum sp = dft(th);
                const int N = u.grid.total();
                for (int c = 0; c < u.channels; ++c)
                    for (int j = 0; j < N; ++j)
                        sp.at(c, j) *= std::exp(-mode_omega2(u.grid, j) * t.tau);
                return sp;
            }
        }
        throw std::logic_error("unreachable");
    }();
    if (t.band_limit >= 0) band_limit_spectrum(s, t.band_limit);
    return idft(s);
}

Dataset gen_dataset(const TargetOperator& target, const GrfSampler& sampler,
                    const GridSpec& grid, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("gen_dataset: n_samples must be >= 1");
    Dataset ds;
    ds.inputs.reserve(n_samples);
    ds.targets.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        GrfSampler si = sampler;
        si.seed = derive_seed(sampler.seed, static_cast<std::uint64_t>(i));
        ds.inputs.push_back(sample_grf(si, grid));
        ds.targets.push_back(apply_target(target, ds.inputs.back()));
    }
    ds.sampler_desc = "grf(alpha=" + std::to_string(sampler.alpha) +
                      ",amplitude=" + std::to_string(sampler.amplitude) +
                      ",seed=" + std::to_string(sampler.seed) + ",prng=mt19937_64)";
    ds.target_desc = target_name(target.kind);
    return ds;
}

namespace {
constexpr char kDsMagic[9] = "NOLABDS1";
}

void save_dataset(const Dataset& ds, const std::string& path) {
    if (ds.inputs.empty()) throw std::invalid_argument("save_dataset: empty dataset");
    const GridSpec& g = ds.inputs.front().grid;
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["dim"] = g.dim;
    manifest["n"] = g.n;
    manifest["length"] = g.length;
    manifest["channels_in"] = ds.inputs.front().channels;
    manifest["channels_out"] = ds.targets.front().channels;
    manifest["n_samples"] = ds.inputs.size();
    manifest["target"] = ds.target_desc;
    manifest["sampler"] = ds.sampler_desc;

    std::vector<double> payload;
    for (const Field& f : ds.inputs)
        payload.insert(payload.end(), f.values.begin(), f.values.end());
    for (const Field& f : ds.targets)
        payload.insert(payload.end(), f.values.begin(), f.values.end());
    binio::write_container(path, kDsMagic, manifest, payload);
}

Dataset load_dataset(const std::string& path) {
    const binio::Container c = binio::read_container(path, kDsMagic);
    const nlohmann::json& m = c.manifest;
    if (m.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported dataset version in " + path);
    const GridSpec g = make_grid(m.at("dim"), m.at("n"), m.at("length"));
    const int ci = m.at("channels_in");
    const int co = m.at("channels_out");
    const size_t ns = m.at("n_samples");
    const size_t expected = ns * g.total() * (static_cast<size_t>(ci) + co);
    if (c.payload.size() != expected)
        throw std::runtime_error("payload length disagrees with manifest in " + path);

    Dataset ds;
    ds.sampler_desc = m.at("sampler");
    ds.target_desc = m.at("target");
    const double* p = c.payload.data();
    for (size_t i = 0; i < ns; ++i) {
        Field f(g, ci);
        std::copy(p, p + f.values.size(), f.values.begin());
        p += f.values.size();
        ds.inputs.push_back(std::move(f));
    }
    for (size_t i = 0; i < ns; ++i) {
        Field f(g, co);
        std::copy(p, p + f.values.size(), f.values.begin());
        p += f.values.size();
        ds.targets.push_back(std::move(f));
    }
    return ds;
}

double mse_loss(const Field& pred, const Field& target, double clip) {
    if (pred.grid != target.grid || pred.channels != target.channels)
        throw std::invalid_argument("mse_loss: grid/channel mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < pred.values.size(); ++i) {
        const double d = pred.values[i] - target.values[i];
        acc += d * d;
    }
    return std::min(acc * pred.grid.cell_volume(), clip);
}

std::pair<double, std::vector<double>> loss_and_grad(const NeuralOperator& op,
                                                     const Batch& batch) {
    if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
    const double inv_b = 1.0 / batch.size();
    double loss = 0.0;
    std::vector<double> grad(param_layout(op).total, 0.0);
    for (const auto& [u, t] : batch) {
        ForwardTrace trace;
        const Field pred = forward_traced(op, *u, trace);
        loss += inv_b * mse_loss(pred, *t);
        Field adj(pred.grid, pred.channels);
        const double scale = 2.0 * pred.grid.cell_volume() * inv_b;
        for (size_t i = 0; i < adj.values.size(); ++i)
            adj.values[i] = scale * (pred.values[i] - t->values[i]);
        const BackwardResult back = backward(op, trace, adj);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += back.grad[i];
    }
    return {loss, std::move(grad)};
}

namespace {

// marks which flat parameters a TrainableSet updates
std::vector<char> trainable_mask(const NeuralOperator& op, TrainableSet set) {
    const ParamLayout layout = param_layout(op);
    std::vector<char> mask(layout.total, 1);
    if (set == TrainableSet::all) return mask;
    size_t off = 0;
    for (const auto& [name, size] : layout.segments) {
        const bool keep = set == TrainableSet::kernel_only
                              ? name.ends_with(".kernel")
                              : name.starts_with("project.");
        if (!keep) std::fill(mask.begin() + off, mask.begin() + off + size, 0);
        off += size;
    }
    return mask;
}

}  // namespace

TrainResult train(const NeuralOperator& op, const Dataset& ds, const TrainConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
    if (!(cfg.learning_rate >= 0.0))
        throw std::invalid_argument("train: learning rate must be >= 0");
    if (ds.inputs.empty()) throw std::invalid_argument("train: empty dataset");

    TrainResult res;
    res.op = op;
    std::vector<double> p = get_parameters(res.op);
    const std::vector<char> mask = trainable_mask(res.op, cfg.trainable);

    std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);  // adam state
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    Rng rng(derive_seed(cfg.seed, 0x7241));
    std::uniform_int_distribution<size_t> pick(0, ds.inputs.size() - 1);

    for (int step = 1; step <= cfg.steps; ++step) {
        Batch batch;
        if (static_cast<size_t>(cfg.batch_size) >= ds.inputs.size()) {
            // full-batch mode: deterministic pass over the whole dataset
            for (size_t i = 0; i < ds.inputs.size(); ++i)
                batch.emplace_back(&ds.inputs[i], &ds.targets[i]);
        } else {
            for (int b = 0; b < cfg.batch_size; ++b) {
                const size_t i = pick(rng);
                batch.emplace_back(&ds.inputs[i], &ds.targets[i]);
            }
        }
        auto [loss, grad] = loss_and_grad(res.op, batch);
        res.history.push_back(loss);
        if (!std::isfinite(loss) || loss > 1e12) {
            res.diverged = true;
            break;
        }
        if (cfg.optimizer == OptimizerKind::sgd) {
            for (size_t i = 0; i < p.size(); ++i)
                if (mask[i]) p[i] -= cfg.learning_rate * grad[i];
        } else {
            const double bc1 = 1.0 - std::pow(beta1, step);
            const double bc2 = 1.0 - std::pow(beta2, step);
            for (size_t i = 0; i < p.size(); ++i) {
                if (!mask[i]) continue;
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                p[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            }
        }
        set_parameters(res.op, p);
    }
    return res;
}

double eval_risk(const NeuralOperator& op, const Dataset& ds, double clip) {
    if (ds.inputs.empty()) throw std::invalid_argument("eval_risk: empty dataset");
    double acc = 0.0;
    for (size_t i = 0; i < ds.inputs.size(); ++i)
        acc += mse_loss(forward(op, ds.inputs[i]), ds.targets[i], clip);
    return acc / ds.inputs.size();
}

double relative_l2_error(const NeuralOperator& op, const Dataset& ds) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ds.inputs.size(); ++i) {
        num += mse_loss(forward(op, ds.inputs[i]), ds.targets[i]);
        const double tn = l2_norm(ds.targets[i]);
        den += tn * tn;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double relative_ht_error(const NeuralOperator& op, const Dataset& ds, double t) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ds.inputs.size(); ++i) {
        const Field diff = field_add(forward(op, ds.inputs[i]), ds.targets[i], -1.0);
        const double dn = hs_norm(diff, t);
        const double tn = hs_norm(ds.targets[i], t);
        num += dn * dn;
        den += tn * tn;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace nolab

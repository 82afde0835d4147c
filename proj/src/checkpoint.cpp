#include <stdexcept>

#include "binio.hpp"
#include "nolab/operator.hpp"

namespace nolab {

namespace {
constexpr char kMagic[9] = "NOLABCK1";
}

void save_checkpoint(const NeuralOperator& op, const std::string& path) {
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["dim"] = op.grid.dim;
    manifest["n"] = op.grid.n;
    manifest["length"] = op.grid.length;
    manifest["in_channels"] = op.in_channels;
    manifest["out_channels"] = op.out_channels;
    manifest["d_v"] = op.d_v;
    manifest["L"] = op.layers.size();
    manifest["activation"] = activation_name(op.layers.front().activation);
    if (op.layers.front().kernel.kind == KernelKind::spectral) {
        manifest["kernel"] = {{"type", "spectral"},
                              {"k_max", op.layers.front().kernel.spectral.k_max}};
    } else {
        manifest["kernel"] = {{"type", "dense"}};
    }
    nlohmann::json order = nlohmann::json::array();
    for (const auto& [name, size] : param_layout(op).segments) order.push_back(name);
    manifest["param_order"] = order;

    binio::write_container(path, kMagic, manifest, get_parameters(op));
}

NeuralOperator load_checkpoint(const std::string& path) {
    const binio::Container c = binio::read_container(path, kMagic);
    const nlohmann::json& m = c.manifest;
    if (m.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version in " + path);

    OperatorConfig cfg;
    cfg.grid = make_grid(m.at("dim"), m.at("n"), m.at("length"));
    cfg.in_channels = m.at("in_channels");
    cfg.out_channels = m.at("out_channels");
    cfg.d_v = m.at("d_v");
    cfg.layers = m.at("L");
    cfg.activation = activation_from_name(m.at("activation"));
    const std::string ktype = m.at("kernel").at("type");
    if (ktype == "spectral") {
        cfg.kernel = KernelKind::spectral;
        cfg.k_max = m.at("kernel").at("k_max");
    } else if (ktype == "dense") {
        cfg.kernel = KernelKind::dense;
    } else {
        throw std::runtime_error("unknown kernel type in " + path);
    }
    cfg.init_scale = 0.0;
    NeuralOperator op = build_operator(cfg, 0);

    const ParamLayout layout = param_layout(op);
    if (c.payload.size() != layout.total)
        throw std::runtime_error("parameter payload length disagrees with manifest in " +
                                 path);
    if (m.at("param_order").size() != layout.segments.size())
        throw std::runtime_error("param_order disagrees with architecture in " + path);
    for (size_t i = 0; i < layout.segments.size(); ++i)
        if (m.at("param_order")[i].get<std::string>() != layout.segments[i].first)
            throw std::runtime_error("param_order mismatch in " + path);

    set_parameters(op, c.payload);
    return op;
}

}  // namespace nolab

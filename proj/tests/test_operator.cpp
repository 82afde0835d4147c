#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nolab/operator.hpp"
#include "nolab/training.hpp"

using namespace nolab;

namespace {

// central finite difference of the batch loss in every parameter direction
void fd_gradient_check(const OperatorConfig& arch, std::uint64_t seed, double step,
                       double tol) {
    NeuralOperator op = build_operator(arch, seed);
    const Field u = sample_grf({2.0, 1.0, seed + 1}, arch.grid, arch.in_channels);
    const Field y = sample_grf({2.0, 1.0, seed + 2}, arch.grid, arch.out_channels);
    const Batch batch = {{&u, &y}};

    const auto [loss0, grad] = loss_and_grad(op, batch);
    CHECK(std::isfinite(loss0));
    std::vector<double> p = get_parameters(op);
    REQUIRE(p.size() == grad.size());

    double worst = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        set_parameters(op, p);
        const double lp = loss_and_grad(op, batch).first;
        p[i] = saved - step;
        set_parameters(op, p);
        const double lm = loss_and_grad(op, batch).first;
        p[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd)));
    }
    set_parameters(op, p);
    CHECK(worst < tol);
}

}  // namespace

TEST_CASE("reverse-mode gradient matches finite differences (spectral)") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 16, 1.0);
    arch.d_v = 3;
    arch.layers = 2;
    arch.k_max = 3;
    arch.activation = ActivationKind::tanh;
    fd_gradient_check(arch, 12, 1e-5, 1e-6);
}

TEST_CASE("reverse-mode gradient matches finite differences (dense kernel)") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 8, 1.0);
    arch.d_v = 2;
    arch.layers = 1;
    arch.kernel = KernelKind::dense;
    arch.activation = ActivationKind::tanh;
    fd_gradient_check(arch, 13, 1e-5, 1e-6);
}

TEST_CASE("reverse-mode gradient matches finite differences (2D, relu-free path)") {
    OperatorConfig arch;
    arch.grid = make_grid(2, 8, 1.0);
    arch.d_v = 2;
    arch.layers = 2;
    arch.k_max = 2;
    arch.activation = ActivationKind::tanh;
    fd_gradient_check(arch, 14, 1e-5, 1e-6);
}

TEST_CASE("input adjoint matches finite differences") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 16, 1.0);
    arch.d_v = 3;
    arch.layers = 2;
    arch.k_max = 3;
    arch.activation = ActivationKind::tanh;
    const NeuralOperator op = build_operator(arch, 21);
    Field u = sample_grf({2.0, 1.0, 22}, arch.grid, 1);
    const Field y = sample_grf({2.0, 1.0, 23}, arch.grid, 1);

    auto loss_of = [&](const Field& in) { return mse_loss(forward(op, in), y); };
    ForwardTrace trace;
    const Field pred = forward_traced(op, u, trace);
    Field adj(pred.grid, pred.channels);
    const double h = pred.grid.cell_volume();
    for (size_t i = 0; i < adj.values.size(); ++i)
        adj.values[i] = 2.0 * h * (pred.values[i] - y.values[i]);
    const Field din = backward(op, trace, adj, true).input_adjoint;

    const double step = 1e-5;
    double worst = 0.0;
    for (size_t i = 0; i < u.values.size(); i += 3) {
        const double saved = u.values[i];
        u.values[i] = saved + step;
        const double lp = loss_of(u);
        u.values[i] = saved - step;
        const double lm = loss_of(u);
        u.values[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - din.values[i]) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("spectral kernel output is real and linear") {
    OperatorConfig arch;
    arch.grid = make_grid(2, 16, 1.0);
    arch.d_v = 3;
    arch.layers = 1;
    arch.k_max = 4;
    const NeuralOperator op = build_operator(arch, 31);
    const KernelSpec& kern = op.layers[0].kernel;
    const Field a = sample_grf({2.0, 1.0, 32}, arch.grid, 3);
    const Field b = sample_grf({2.0, 1.0, 33}, arch.grid, 3);
    const Field ka = apply_kernel(kern, a);
    const Field kb = apply_kernel(kern, b);
    CHECK(field_finite(ka));
    const Field kab = apply_kernel(kern, field_add(a, b, 2.0));
    for (size_t i = 0; i < kab.values.size(); ++i)
        CHECK(kab.values[i] == doctest::Approx(ka.values[i] + 2.0 * kb.values[i]).epsilon(1e-11));
}

TEST_CASE("identity configuration is the identity map") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 32, 1.0);
    arch.d_v = 1;
    arch.layers = 1;
    arch.k_max = 0;
    arch.activation = ActivationKind::identity;
    arch.init_scale = 0.0;
    NeuralOperator op = build_operator(arch, 0);
    op.lift.w(0, 0) = 1.0;
    op.layers[0].w(0, 0) = 1.0;
    op.project.w(0, 0) = 1.0;
    const Field u = sample_grf({2.0, 1.0, 44}, arch.grid, 1);
    const Field out = forward(op, u);
    for (size_t i = 0; i < u.values.size(); ++i)
        CHECK(out.values[i] == doctest::Approx(u.values[i]).epsilon(1e-13));
}

TEST_CASE("certificate bounds observed difference quotients") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 32, 1.0);
    arch.d_v = 4;
    arch.layers = 2;
    arch.k_max = 4;
    arch.activation = ActivationKind::tanh;
    const NeuralOperator op = build_operator(arch, 51);
    const LipschitzCert cert = lipschitz_cert(op);
    CHECK(cert.product > 0.0);
    CHECK(cert.layer_l.size() == 2);
    for (int t = 0; t < 100; ++t) {
        const Field a = sample_grf({2.0, 1.0, std::uint64_t(1000 + t)}, arch.grid, 1);
        const Field b = sample_grf({2.0, 1.0, std::uint64_t(2000 + t)}, arch.grid, 1);
        const double num = l2_norm(field_add(forward(op, a), forward(op, b), -1.0));
        const double den = l2_norm(field_add(a, b, -1.0));
        CHECK(num <= cert.product * den * (1.0 + 1e-9));
    }
    // zero-input norm
    Field zero(arch.grid, 1);
    CHECK(cert.c0 == doctest::Approx(l2_norm(forward(op, zero))).epsilon(1e-12));
}

TEST_CASE("rescaling yields a contraction and a stable fixed point") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 32, 1.0);
    arch.d_v = 4;
    arch.layers = 2;
    arch.k_max = 4;
    arch.activation = ActivationKind::tanh;
    const NeuralOperator base = build_operator(arch, 61);
    const NeuralOperator op = rescale_to_contraction(base, 0.5);
    CHECK(lipschitz_cert(op).product <= 0.5 * (1.0 + 1e-12));

    const double tol = 1e-10;
    const Field u0 = sample_grf({2.0, 1.0, 62}, arch.grid, 1);
    const FixedPointResult fp = iterate_to_fixed_point(op, u0, tol, 5000);
    CHECK(fp.converged);
    const double residual =
        l2_norm(field_add(forward(op, fp.fixed_point), fp.fixed_point, -1.0));
    CHECK(residual <= 10.0 * tol);
    // another start lands on the same point
    const Field u1 = sample_grf({2.0, 1.0, 63}, arch.grid, 1);
    const FixedPointResult fp2 = iterate_to_fixed_point(op, u1, tol, 5000);
    CHECK(l2_norm(field_add(fp.fixed_point, fp2.fixed_point, -1.0)) <= 10.0 * tol);
}

TEST_CASE("parameter vector round trip") {
    OperatorConfig arch;
    arch.grid = make_grid(2, 8, 1.0);
    arch.d_v = 3;
    arch.layers = 2;
    arch.k_max = 2;
    NeuralOperator op = build_operator(arch, 71);
    const std::vector<double> p = get_parameters(op);
    CHECK(p.size() == param_layout(op).total);
    NeuralOperator other = build_operator(arch, 72);
    set_parameters(other, p);
    CHECK(get_parameters(other) == p);
    const Field u = sample_grf({2.0, 1.0, 73}, arch.grid, 1);
    CHECK(forward(op, u).values == forward(other, u).values);
}

TEST_CASE("checkpoint survives save and load bit-exactly") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 16, 1.0);
    arch.d_v = 3;
    arch.layers = 2;
    arch.k_max = 3;
    const NeuralOperator op = build_operator(arch, 81);
    const std::string path = "test_ckpt.bin";
    save_checkpoint(op, path);
    const NeuralOperator loaded = load_checkpoint(path);
    CHECK(get_parameters(loaded) == get_parameters(op));
    CHECK(loaded.grid == op.grid);
    // byte-identical on re-save
    save_checkpoint(loaded, "test_ckpt2.bin");
    std::ifstream a(path, std::ios::binary), b("test_ckpt2.bin", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    std::filesystem::remove(path);
    std::filesystem::remove("test_ckpt2.bin");
}

TEST_CASE("non-finite states are reported") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 16, 1.0);
    arch.d_v = 2;
    arch.layers = 1;
    arch.k_max = 2;
    arch.activation = ActivationKind::identity;
    NeuralOperator op = build_operator(arch, 91);
    Field u = sample_grf({2.0, 1.0, 92}, arch.grid, 1);
    u.values[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(forward(op, u));
}

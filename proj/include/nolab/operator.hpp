#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nolab/grid.hpp"

namespace nolab {

enum class ActivationKind { relu, tanh, identity };

double activate(ActivationKind k, double x);
double activate_deriv(ActivationKind k, double x);
constexpr double activation_lipschitz(ActivationKind) { return 1.0; }

std::string activation_name(ActivationKind k);
ActivationKind activation_from_name(const std::string& s);

enum class KernelKind { dense, spectral };

// Translation-invariant kernel as per-frequency multipliers R_k (d_v x d_v,
// complex, conjugate-symmetric: R_{-k} = conj(R_k)), modes |k_a| <= k_max.
struct SpectralKernel {
    int dim = 1;
    int d_v = 1;
    int k_max = 0;
    std::vector<std::complex<double>> multipliers;  // mode-major, row-major matrices

    int modes_per_axis() const { return 2 * k_max + 1; }
    int mode_count() const {
        int m = modes_per_axis();
        return dim == 1 ? m : m * m;
    }
    std::complex<double>& at(int mode, int r, int c) {
        return multipliers[(static_cast<size_t>(mode) * d_v + r) * d_v + c];
    }
    std::complex<double> at(int mode, int r, int c) const {
        return multipliers[(static_cast<size_t>(mode) * d_v + r) * d_v + c];
    }
    // frequency vector of the enumerated mode, k[0] slowest axis
    void mode_freq(int mode, int* k) const;
};

// General kernel matrix kappa(x_i, x_j) blocks; row index = j*d_v + c.
struct DenseKernel {
    int d_v = 1;
    GridSpec grid;
    Eigen::MatrixXd matrix;
};

struct KernelSpec {
    KernelKind kind = KernelKind::spectral;
    SpectralKernel spectral;
    DenseKernel dense;
};

struct LayerParams {
    Eigen::MatrixXd w;     // d_v x d_v pointwise operator
    Eigen::VectorXd bias;  // d_v, applied inside the activation argument
    KernelSpec kernel;
    ActivationKind activation = ActivationKind::tanh;
};

struct AffineMap {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
};

// Lifting P, L kernel-integral layers, projection Q:
//   v_0 = P(u),  v_{i+1} = W_i v_i + sigma(K_i v_i + b_i),  output = Q(v_L)
struct NeuralOperator {
    GridSpec grid;
    int in_channels = 1;
    int out_channels = 1;
    int d_v = 1;
    AffineMap lift;
    std::vector<LayerParams> layers;
    AffineMap project;
};

struct OperatorConfig {
    GridSpec grid;
    int in_channels = 1;
    int out_channels = 1;
    int d_v = 1;
    int layers = 1;
    KernelKind kernel = KernelKind::spectral;
    int k_max = 4;
    ActivationKind activation = ActivationKind::tanh;
    double init_scale = 1.0;  // 0 gives the all-zero-parameter operator
};

NeuralOperator build_operator(const OperatorConfig& cfg, std::uint64_t seed);

Field apply_kernel(const KernelSpec& kernel, const Field& v);

// One layer update W v + sigma(K v + b) on the field's own grid.
Field apply_layer(const LayerParams& layer, const Field& v);

Field forward(const NeuralOperator& op, const Field& u);

struct ForwardTrace {
    Field input;
    std::vector<Field> v;  // states v_0 .. v_L
    std::vector<Field> z;  // per-layer pre-activations K v_i + b_i
    Field output;
};

Field forward_traced(const NeuralOperator& op, const Field& u, ForwardTrace& trace);

// Reverse accumulation through the layer recursion. output_adjoint holds
// dLoss/d(output value) entries; grad is laid out as in param_layout.
struct BackwardResult {
    std::vector<double> grad;
    Field input_adjoint;
};

BackwardResult backward(const NeuralOperator& op, const ForwardTrace& trace,
                        const Field& output_adjoint, bool want_input_adjoint = false);

// Flat parameter access. Segment order: lift.w, lift.b,
// layer{i}.w, layer{i}.b, layer{i}.kernel (complex as re,im), project.w, project.b.
struct ParamLayout {
    std::vector<std::pair<std::string, size_t>> segments;  // name -> size
    size_t total = 0;
};

ParamLayout param_layout(const NeuralOperator& op);
std::vector<double> get_parameters(const NeuralOperator& op);
void set_parameters(NeuralOperator& op, std::span<const double> p);

// Per-component Lipschitz constants in L2 and their product bound.
struct LipschitzCert {
    double lift_l = 0.0;
    double project_l = 0.0;
    std::vector<double> layer_l;  // ||W_i||_2 + L_sigma * ||K_i||_op
    double product = 0.0;
    double c0 = 0.0;  // L2 norm of the zero-input output
};

LipschitzCert lipschitz_cert(const NeuralOperator& op);

NeuralOperator rescale_to_contraction(const NeuralOperator& op, double q);

struct FixedPointResult {
    Field fixed_point;
    std::vector<double> iterate_norms;  // ||u_n - u*|| against the final iterate
    int iterations = 0;
    bool converged = false;
};

FixedPointResult iterate_to_fixed_point(const NeuralOperator& op, const Field& u0, double tol,
                                        int max_iter);

void save_checkpoint(const NeuralOperator& op, const std::string& path);
NeuralOperator load_checkpoint(const std::string& path);

}  // namespace nolab

#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nolab/operator.hpp"

namespace nolab {

enum class TargetKind { bessel_inverse, antiderivative, smoothed_tanh };

std::string target_name(TargetKind k);
TargetKind target_from_name(const std::string& s);

// Target operators with known spectral oracles:
//   bessel_inverse: multiplier (1+|2 pi k/length|^2)^-1, i.e. solves (1 - Lap) v = u
//   antiderivative: multiplier 1/(i 2 pi k / length), zero-mean convention (d=1 only)
//   smoothed_tanh:  pointwise tanh, then Gaussian filter exp(-|2 pi k/length|^2 tau)
// band_limit >= 0 zeroes output modes with any |k_a| > band_limit.
struct TargetOperator {
    TargetKind kind = TargetKind::bessel_inverse;
    double tau = 0.01;
    int band_limit = -1;
};

Field apply_target(const TargetOperator& t, const Field& u);

struct Dataset {
    std::vector<Field> inputs;
    std::vector<Field> targets;
    std::string sampler_desc;
    std::string target_desc;
};

Dataset gen_dataset(const TargetOperator& target, const GrfSampler& sampler,
                    const GridSpec& grid, int n_samples);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Squared L2 quadrature loss, clipped at B.
double mse_loss(const Field& pred, const Field& target,
                double clip = std::numeric_limits<double>::infinity());

enum class OptimizerKind { sgd, adam };
enum class TrainableSet { all, kernel_only, project_only };

struct TrainConfig {
    int steps = 1000;
    int batch_size = 8;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    std::uint64_t seed = 0;
    double loss_clip = std::numeric_limits<double>::infinity();
    TrainableSet trainable = TrainableSet::all;
};

using Batch = std::vector<std::pair<const Field*, const Field*>>;

// Mean unclipped MSE over the batch and its exact reverse-mode gradient.
std::pair<double, std::vector<double>> loss_and_grad(const NeuralOperator& op,
                                                     const Batch& batch);

struct TrainResult {
    NeuralOperator op;
    std::vector<double> history;  // per-step batch loss
    bool diverged = false;
};

TrainResult train(const NeuralOperator& op, const Dataset& ds, const TrainConfig& cfg);

// Mean clipped loss over the dataset.
double eval_risk(const NeuralOperator& op, const Dataset& ds, double clip);

// sqrt( sum ||pred - target||^2 / sum ||target||^2 )
double relative_l2_error(const NeuralOperator& op, const Dataset& ds);

// Relative error in the H^t norm, reported alongside the L2 figure.
double relative_ht_error(const NeuralOperator& op, const Dataset& ds, double t);

}  // namespace nolab

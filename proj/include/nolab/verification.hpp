#pragma once

#include "nolab/operator.hpp"
#include "nolab/report.hpp"
#include "nolab/training.hpp"

namespace nolab {

// ---- gradient-flow potentials ----

// Quadratic: Phi(u) = 1/2 sum_k a_k |u_k|^2 length^d - <f,u>, a_k = 1 + |2 pi k/length|^2.
// DoubleWell: Phi(u) = integral( u^4/4 - u^2/2 ) + eps/2 ||grad u||^2.
struct Potential {
    enum class Kind { quadratic, double_well } kind = Kind::quadratic;
    Field forcing;      // quadratic only
    double eps = 1e-3;  // double-well only
};

double potential_value(const Potential& p, const Field& u);
Field potential_grad(const Potential& p, const Field& u);
// unique minimizer of the quadratic potential: coefficients f_k / a_k
Field quadratic_minimizer(const Potential& p);
double quadratic_max_multiplier(const GridSpec& g);

struct FlowResult {
    std::vector<double> phi;         // steps+1 values
    std::vector<double> grad_norms;  // L2 norm of grad Phi per recorded state
    Field final_state;
    double eta = 0.0;
    int steps = 0;
    bool blew_up = false;
};

// Explicit Euler steps u <- u - eta * grad Phi(u); blow-up guard at 1e12.
FlowResult run_gradient_flow(const Potential& p, const Field& u0, double eta, int steps);

// ---- per-theorem experiments ----

VerifyReport verify_stability(const NeuralOperator& op, const GrfSampler& sampler,
                              int trials, int adversarial_steps = 100);

VerifyReport verify_sensitivity(const NeuralOperator& op, const GrfSampler& sampler,
                                int trials, const std::vector<double>& delta_norms);

VerifyReport verify_contraction(const NeuralOperator& op_base,
                                const std::vector<double>& q_list, int starts,
                                double tol = 1e-10, std::uint64_t seed = 0);

VerifyReport verify_flow_equivalence(const GridSpec& grid, double forcing_level, double eta,
                                     int steps = 100, std::uint64_t seed = 0);

struct ClusteringConfig {
    Potential::Kind kind = Potential::Kind::quadratic;
    GridSpec grid;
    int n_starts = 20;
    double eta = 2.5e-3;
    int steps = 12000;
    double eps = 1e-3;  // double-well width
    std::uint64_t seed = 0;
};

VerifyReport verify_clustering(const ClusteringConfig& cfg);

struct UniversalityConfig {
    TargetOperator target;
    GridSpec grid;
    OperatorConfig arch;
    TrainConfig train_cfg;
    int n_train = 64;
    int n_test = 256;
    double grf_alpha = 2.5;
    double eps_goal = 1e-3;
    std::uint64_t seed = 0;
};

VerifyReport universality_experiment(const UniversalityConfig& cfg);

struct GeneralizationConfig {
    GridSpec grid;
    TargetOperator target;
    std::vector<int> n_list = {16, 32, 64, 128, 256, 512, 1024};
    int draws_per_n = 500;       // M
    double delta = 0.05;
    int reference_samples = 100000;
    double clip = -1.0;  // <0: default to 4x the p99 of reference losses
    double grf_alpha = 2.5;
    std::uint64_t seed = 0;
};

VerifyReport verify_generalization(const NeuralOperator& frozen_op,
                                   const GeneralizationConfig& cfg);

struct CapacityConfig {
    GridSpec grid;
    int target_band = 4;
    std::vector<int> capacities = {1, 2, 4, 8, 16};
    int restarts = 5;
    int steps_per_run = 4000;
    int n_train = 64;
    int n_test = 256;
    std::uint64_t seed = 0;
};

VerifyReport capacity_sweep(const CapacityConfig& cfg);

struct NonconvexityConfig {
    GridSpec grid;
    std::uint64_t seed_a = 1;
    std::uint64_t seed_b = 2;
    int lambda_points = 21;
    int train_steps = 800;
    int n_train = 16;
    bool linear_control = false;  // restrict the segment to the projection layer
    std::uint64_t seed = 0;
};

VerifyReport nonconvexity_witness(const NonconvexityConfig& cfg);

struct ComplexityConfig {
    KernelKind kernel = KernelKind::spectral;
    std::vector<int> sizes = {256, 512, 1024, 2048, 4096, 8192, 16384};
    int reps = 20;
    std::uint64_t seed = 0;
};

VerifyReport bench_complexity(const ComplexityConfig& cfg);

struct DiscretizationConfig {
    int n_coarse = 32;
    std::vector<int> layer_counts = {1, 2, 4, 8};
    int d_v = 4;
    int k_max = 4;
    std::uint64_t seed = 0;
};

VerifyReport verify_discretization(const DiscretizationConfig& cfg);

// least-squares fit of y = slope*x + intercept; returns R^2 and the 95%
// confidence half-width of the slope
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_ci95 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nolab

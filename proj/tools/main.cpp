// nolab command-line driver: dataset generation, training, verification
// experiments, and kernel benchmarks. Exit codes: 0 success, 1 assertion or
// run failure, 2 usage/config error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "nolab/rng.hpp"
#include "nolab/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nolab;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int threads_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NOLAB_THREADS")) {
        try {
            cap = std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw UsageError("NOLAB_THREADS must be a positive integer");
        }
    }
    return std::max(1, cap);
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // report the failing line/column computed from the byte offset
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << path << ": JSON parse error at line " << line << ", column " << col;
        throw UsageError(msg.str());
    }
}

// Overlay user settings onto defaults; any key absent from the defaults is a
// config error (silent typos would invalidate an experiment).
json merge_strict(const json& defaults, const json& user, const std::string& scope) {
    if (!user.is_object()) throw UsageError("config at " + scope + " must be an object");
    json out = defaults;
    for (const auto& [key, val] : user.items()) {
        if (!defaults.contains(key))
            throw UsageError("unknown config key '" + scope + key + "'");
        if (defaults[key].is_object())
            out[key] = merge_strict(defaults[key], val, scope + key + ".");
        else
            out[key] = val;
    }
    return out;
}

std::string normalize_name(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

// ---- gen-data ----

int cmd_gen_data(const std::string& target, int grid_n, int dim, int n_samples,
                 double alpha, double tau, int band_limit, std::uint64_t seed,
                 double length, const std::string& out) {
    const GridSpec grid = make_grid(dim, grid_n, length);
    TargetOperator t;
    t.kind = target_from_name(normalize_name(target));
    t.tau = tau;
    t.band_limit = band_limit;
    const GrfSampler sampler{alpha, 1.0, seed};
    const Dataset ds = gen_dataset(t, sampler, grid, n_samples);
    save_dataset(ds, out);
    json summary = {{"path", out},
                    {"n_samples", n_samples},
                    {"grid", {{"dim", dim}, {"n", grid_n}, {"length", length}}},
                    {"target", ds.target_desc},
                    {"sampler", ds.sampler_desc},
                    {"bytes", static_cast<std::uint64_t>(fs::file_size(out))}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ---- train ----

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out) {
    const json defaults = {
        {"arch",
         {{"d_v", 4},
          {"layers", 2},
          {"kernel", "spectral"},
          {"k_max", 4},
          {"activation", "tanh"},
          {"init_scale", 1.0}}},
        {"train",
         {{"steps", 1000},
          {"batch_size", 8},
          {"learning_rate", 1e-3},
          {"optimizer", "adam"},
          {"trainable", "all"},
          {"loss_clip", -1.0}}},
        {"seed", 0}};
    const json cfg = merge_strict(defaults, parse_json_file(config_path), "");

    const Dataset ds = load_dataset(data_path);
    if (ds.inputs.empty()) throw UsageError("dataset is empty: " + data_path);

    OperatorConfig arch;
    arch.grid = ds.inputs[0].grid;
    arch.in_channels = ds.inputs[0].channels;
    arch.out_channels = ds.targets[0].channels;
    arch.d_v = cfg["arch"]["d_v"];
    arch.layers = cfg["arch"]["layers"];
    arch.k_max = cfg["arch"]["k_max"];
    arch.init_scale = cfg["arch"]["init_scale"];
    const std::string kernel = cfg["arch"]["kernel"];
    if (kernel == "spectral")
        arch.kernel = KernelKind::spectral;
    else if (kernel == "dense")
        arch.kernel = KernelKind::dense;
    else
        throw UsageError("arch.kernel must be 'spectral' or 'dense'");
    arch.activation = activation_from_name(cfg["arch"]["activation"]);

    TrainConfig tc;
    tc.steps = cfg["train"]["steps"];
    tc.batch_size = cfg["train"]["batch_size"];
    tc.learning_rate = cfg["train"]["learning_rate"];
    const std::string opt = cfg["train"]["optimizer"];
    if (opt == "adam")
        tc.optimizer = OptimizerKind::adam;
    else if (opt == "sgd")
        tc.optimizer = OptimizerKind::sgd;
    else
        throw UsageError("train.optimizer must be 'adam' or 'sgd'");
    const std::string trainable = cfg["train"]["trainable"];
    if (trainable == "all")
        tc.trainable = TrainableSet::all;
    else if (trainable == "kernel_only")
        tc.trainable = TrainableSet::kernel_only;
    else if (trainable == "project_only")
        tc.trainable = TrainableSet::project_only;
    else
        throw UsageError("train.trainable must be all|kernel_only|project_only");
    const double clip = cfg["train"]["loss_clip"];
    if (clip > 0.0) tc.loss_clip = clip;
    const std::uint64_t seed = cfg["seed"];
    tc.seed = derive_seed(seed, 1);

    const NeuralOperator op0 = build_operator(arch, derive_seed(seed, 0));
    const TrainResult res = train(op0, ds, tc);

    const fs::path out_path(out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    save_checkpoint(res.op, out);
    const fs::path hist_path =
        (out_path.has_parent_path() ? out_path.parent_path() : fs::path(".")) /
        "history.csv";
    {
        std::ofstream csv(hist_path);
        csv << "step,loss\r\n";
        csv.precision(17);
        for (size_t i = 0; i < res.history.size(); ++i)
            csv << i << "," << res.history[i] << "\r\n";
    }
    json summary = {{"checkpoint", out},
                    {"history", hist_path.string()},
                    {"steps_run", res.history.size()},
                    {"final_loss", res.history.empty() ? 0.0 : res.history.back()},
                    {"diverged", res.diverged}};
    std::cout << summary.dump(2) << "\n";
    return res.diverged ? 1 : 0;
}

// ---- verify ----

NeuralOperator probe_operator(const json& c, const std::string& model) {
    if (!model.empty()) return load_checkpoint(model);
    OperatorConfig arch;
    arch.grid = make_grid(c["dim"], c["grid_n"], c["length"]);
    arch.d_v = c["d_v"];
    arch.layers = c["layers"];
    arch.k_max = c["k_max"];
    arch.activation = activation_from_name(c["activation"]);
    return build_operator(arch, derive_seed(c["seed"], 0xA0));
}

json probe_defaults(std::uint64_t seed) {
    return {{"grid_n", 32},     {"dim", 1},   {"length", 1.0},
            {"d_v", 4},         {"layers", 2}, {"k_max", 4},
            {"activation", "tanh"}, {"seed", seed}};
}

std::vector<VerifyReport> run_experiment(const std::string& name, const json& user,
                                         bool quick, const std::string& model) {
    const auto shrink = [&](int v, int floor_v) {
        return quick ? std::max(floor_v, v / 10) : v;
    };

    if (name == "stability") {
        json d = probe_defaults(7);
        d["trials"] = 1000;
        d["adversarial_steps"] = 100;
        d["alpha"] = 2.5;
        const json c = merge_strict(d, user, "");
        const NeuralOperator op = probe_operator(c, model);
        const GrfSampler sampler{c["alpha"], 1.0, derive_seed(c["seed"], 1)};
        return {verify_stability(op, sampler, shrink(c["trials"], 100),
                                 c["adversarial_steps"])};
    }
    if (name == "sensitivity") {
        json d = probe_defaults(7);
        d["trials"] = 250;
        d["delta_norms"] = {1e-4, 1e-3, 1e-2, 1e-1};
        d["alpha"] = 2.5;
        const json c = merge_strict(d, user, "");
        const NeuralOperator op = probe_operator(c, model);
        const GrfSampler sampler{c["alpha"], 1.0, derive_seed(c["seed"], 2)};
        return {verify_sensitivity(op, sampler, shrink(c["trials"], 25),
                                   c["delta_norms"].get<std::vector<double>>())};
    }
    if (name == "contraction") {
        json d = probe_defaults(7);
        d["q_list"] = {0.3, 0.7, 0.9};
        d["starts"] = 3;
        d["tol"] = 1e-10;
        const json c = merge_strict(d, user, "");
        const NeuralOperator op = probe_operator(c, model);
        return {verify_contraction(op, c["q_list"].get<std::vector<double>>(),
                                   c["starts"], c["tol"], derive_seed(c["seed"], 3))};
    }
    if (name == "flow") {
        const json c = merge_strict({{"grid_n", 32},
                                     {"dim", 1},
                                     {"length", 1.0},
                                     {"forcing", 0.5},
                                     {"eta", 1e-4},
                                     {"steps", 100},
                                     {"seed", 11}},
                                    user, "");
        return {verify_flow_equivalence(make_grid(c["dim"], c["grid_n"], c["length"]),
                                        c["forcing"], c["eta"], c["steps"], c["seed"])};
    }
    if (name == "clustering") {
        const json c = merge_strict(
            {{"quadratic",
              {{"grid_n", 8}, {"eta", 2.5e-3}, {"steps", 12000}, {"n_starts", 20},
               {"seed", 21}}},
             {"double_well",
              {{"grid_n", 32}, {"eta", 0.05}, {"steps", 2000}, {"n_starts", 20},
               {"eps", 1e-3}, {"seed", 22}}}},
            user, "");
        ClusteringConfig q;
        q.kind = Potential::Kind::quadratic;
        q.grid = make_grid(1, c["quadratic"]["grid_n"], 1.0);
        q.eta = c["quadratic"]["eta"];
        q.steps = c["quadratic"]["steps"];
        q.n_starts = c["quadratic"]["n_starts"];
        q.seed = c["quadratic"]["seed"];
        ClusteringConfig w;
        w.kind = Potential::Kind::double_well;
        w.grid = make_grid(1, c["double_well"]["grid_n"], 1.0);
        w.eta = c["double_well"]["eta"];
        w.steps = c["double_well"]["steps"];
        w.n_starts = c["double_well"]["n_starts"];
        w.eps = c["double_well"]["eps"];
        w.seed = c["double_well"]["seed"];
        return {verify_clustering(q), verify_clustering(w)};
    }
    if (name == "universality") {
        const json c = merge_strict({{"grid_n", 32},
                                     {"n_train", 64},
                                     {"n_test", 256},
                                     {"steps_bessel", 4000},
                                     {"steps_smoothed", 6000},
                                     {"eps_bessel", 1e-3},
                                     {"eps_smoothed", 5e-2},
                                     {"seed", 31}},
                                    user, "");
        const GridSpec grid = make_grid(1, c["grid_n"], 1.0);
        UniversalityConfig b;
        b.target = {TargetKind::bessel_inverse, 0.01, -1};
        b.grid = grid;
        b.arch.grid = grid;
        b.arch.d_v = 1;
        b.arch.layers = 1;
        b.arch.k_max = grid.n / 2 - 1;
        b.arch.activation = ActivationKind::identity;
        b.train_cfg.steps = quick ? int(c["steps_bessel"]) / 4 : int(c["steps_bessel"]);
        b.train_cfg.batch_size = 16;
        b.train_cfg.learning_rate = 2e-2;
        b.train_cfg.seed = derive_seed(c["seed"], 1);
        b.n_train = c["n_train"];
        b.n_test = c["n_test"];
        b.eps_goal = c["eps_bessel"];
        b.seed = c["seed"];
        UniversalityConfig s;
        s.target = {TargetKind::smoothed_tanh, 0.01, -1};
        s.grid = grid;
        s.arch.grid = grid;
        s.arch.d_v = 12;
        s.arch.layers = 2;
        s.arch.k_max = 6;
        s.arch.activation = ActivationKind::tanh;
        s.train_cfg.steps = quick ? int(c["steps_smoothed"]) / 4 : int(c["steps_smoothed"]);
        s.train_cfg.batch_size = 16;
        s.train_cfg.learning_rate = 3e-3;
        s.train_cfg.seed = derive_seed(c["seed"], 2);
        s.n_train = c["n_train"];
        s.n_test = c["n_test"];
        s.eps_goal = c["eps_smoothed"];
        s.seed = derive_seed(c["seed"], 3);
        return {universality_experiment(b), universality_experiment(s)};
    }
    if (name == "generalization") {
        const json c = merge_strict({{"grid_n", 32},
                                     {"d_v", 4},
                                     {"layers", 1},
                                     {"k_max", 4},
                                     {"n_list", {16, 32, 64, 128, 256, 512, 1024}},
                                     {"draws_per_n", 500},
                                     {"delta", 0.05},
                                     {"reference_samples", 100000},
                                     {"clip", -1.0},
                                     {"alpha", 2.5},
                                     {"seed", 41}},
                                    user, "");
        GeneralizationConfig g;
        g.grid = make_grid(1, c["grid_n"], 1.0);
        g.target = {TargetKind::bessel_inverse, 0.01, -1};
        g.n_list = c["n_list"].get<std::vector<int>>();
        g.draws_per_n = shrink(c["draws_per_n"], 50);
        g.delta = c["delta"];
        g.reference_samples = shrink(c["reference_samples"], 10000);
        g.clip = c["clip"];
        g.grf_alpha = c["alpha"];
        g.seed = c["seed"];
        NeuralOperator op;
        if (!model.empty()) {
            op = load_checkpoint(model);
        } else {
            OperatorConfig arch;
            arch.grid = g.grid;
            arch.d_v = c["d_v"];
            arch.layers = c["layers"];
            arch.k_max = c["k_max"];
            arch.activation = ActivationKind::tanh;
            op = build_operator(arch, derive_seed(g.seed, 0xF0));
        }
        return {verify_generalization(op, g)};
    }
    if (name == "capacity") {
        const json c = merge_strict({{"grid_n", 64},
                                     {"target_band", 4},
                                     {"capacities", {1, 2, 4, 8, 16}},
                                     {"restarts", 5},
                                     {"steps_per_run", 4000},
                                     {"n_train", 64},
                                     {"n_test", 256},
                                     {"seed", 51}},
                                    user, "");
        CapacityConfig cc;
        cc.grid = make_grid(1, c["grid_n"], 1.0);
        cc.target_band = c["target_band"];
        cc.capacities = c["capacities"].get<std::vector<int>>();
        cc.restarts = c["restarts"];
        cc.steps_per_run = quick ? int(c["steps_per_run"]) / 4 : int(c["steps_per_run"]);
        cc.n_train = c["n_train"];
        cc.n_test = c["n_test"];
        cc.seed = c["seed"];
        return {capacity_sweep(cc)};
    }
    if (name == "nonconvexity") {
        const json c = merge_strict({{"grid_n", 16},
                                     {"seed_a", 1},
                                     {"seed_b", 2},
                                     {"lambda_points", 21},
                                     {"train_steps", 800},
                                     {"n_train", 16},
                                     {"seed", 61}},
                                    user, "");
        NonconvexityConfig nc;
        nc.grid = make_grid(1, c["grid_n"], 1.0);
        nc.seed_a = c["seed_a"];
        nc.seed_b = c["seed_b"];
        nc.lambda_points = c["lambda_points"];
        nc.train_steps = c["train_steps"];
        nc.n_train = c["n_train"];
        nc.seed = c["seed"];
        nc.linear_control = false;
        VerifyReport witness = nonconvexity_witness(nc);
        nc.linear_control = true;
        VerifyReport control = nonconvexity_witness(nc);
        return {witness, control};
    }
    if (name == "complexity") {
        const json c = merge_strict(
            {{"sizes_spectral", {256, 512, 1024, 2048, 4096, 8192, 16384}},
             {"sizes_dense", {64, 128, 256, 512, 1024}},
             {"reps", 20},
             {"seed", 71}},
            user, "");
        ComplexityConfig sp;
        sp.kernel = KernelKind::spectral;
        sp.sizes = c["sizes_spectral"].get<std::vector<int>>();
        sp.reps = quick ? 5 : int(c["reps"]);
        sp.seed = c["seed"];
        ComplexityConfig de;
        de.kernel = KernelKind::dense;
        de.sizes = c["sizes_dense"].get<std::vector<int>>();
        de.reps = sp.reps;
        de.seed = c["seed"];
        return {bench_complexity(sp), bench_complexity(de)};
    }
    if (name == "discretization") {
        const json c = merge_strict({{"n_coarse", 32},
                                     {"layer_counts", {1, 2, 4, 8}},
                                     {"d_v", 4},
                                     {"k_max", 4},
                                     {"seed", 81}},
                                    user, "");
        DiscretizationConfig dc;
        dc.n_coarse = c["n_coarse"];
        dc.layer_counts = c["layer_counts"].get<std::vector<int>>();
        dc.d_v = c["d_v"];
        dc.k_max = c["k_max"];
        dc.seed = c["seed"];
        return {verify_discretization(dc)};
    }
    throw UsageError(
        "unknown experiment '" + name +
        "'; valid: stability sensitivity contraction flow clustering universality "
        "generalization capacity nonconvexity complexity discretization all");
}

int cmd_verify(const std::string& experiment, const std::string& config_path,
               const std::string& model, const std::string& out_dir, bool quick) {
    const json user = config_path.empty() ? json::object() : parse_json_file(config_path);
    const std::vector<std::string> all_names = {
        "stability",      "sensitivity", "contraction", "flow",
        "clustering",     "universality", "generalization", "capacity",
        "nonconvexity",   "complexity",  "discretization"};

    std::vector<std::string> to_run;
    if (experiment == "all") {
        to_run = all_names;
    } else {
        to_run = {normalize_name(experiment)};
    }

    bool all_pass = true;
    json manifest_runs = json::array();
    for (const std::string& name : to_run) {
        json cfg = user;
        if (experiment == "all") {
            cfg = json::object();
            if (user.contains(name)) cfg = user[name];
            for (const auto& [key, val] : user.items()) {
                (void)val;
                if (std::find(all_names.begin(), all_names.end(), key) == all_names.end())
                    throw UsageError("unknown experiment key '" + key +
                                     "' in suite config");
            }
        }
        const std::vector<VerifyReport> reps =
            run_experiment(name, cfg, quick, experiment == "all" ? "" : model);
        for (const VerifyReport& rep : reps) {
            write_report(rep, out_dir);
            const bool ok = rep.pass();
            all_pass = all_pass && ok;
            manifest_runs.push_back({{"experiment", rep.experiment},
                                     {"status", rep.status},
                                     {"pass", ok},
                                     {"wall_ms", rep.wall_ms}});
            std::cout << (ok ? "PASS " : "FAIL ") << rep.experiment << " ("
                      << rep.assertions.size() << " assertions, " << rep.wall_ms
                      << " ms)\n";
        }
    }
    if (experiment == "all") {
        json manifest = {{"runs", manifest_runs},
                         {"pass", all_pass},
                         {"quick", quick},
                         {"threads_cap", threads_cap()}};
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "suite.json");
        out << manifest.dump(2) << "\n";
    }
    return all_pass ? 0 : 1;
}

// ---- bench ----

int cmd_bench(const std::string& kernel, std::vector<int> sizes, int reps,
              std::uint64_t seed, const std::string& out_dir) {
    if (sizes.size() < 3) throw UsageError("bench needs at least 3 sizes");
    if (reps < 20)
        std::cerr << "warning: reps < 20, report may be marked inconclusive\n";
    ComplexityConfig cfg;
    if (kernel == "spectral")
        cfg.kernel = KernelKind::spectral;
    else if (kernel == "dense")
        cfg.kernel = KernelKind::dense;
    else
        throw UsageError("--kernel must be 'dense' or 'spectral'");
    std::sort(sizes.begin(), sizes.end());
    cfg.sizes = sizes;
    cfg.reps = reps;
    cfg.seed = seed;
    const VerifyReport rep = bench_complexity(cfg);
    write_report(rep, out_dir);
    // CSV of (N, median_ms) alongside the per-series files
    {
        fs::create_directories(out_dir);
        std::ofstream csv(fs::path(out_dir) / (rep.experiment + "_sizes.csv"));
        csv << "n,median_ms\r\n";
        csv.precision(17);
        const auto& med = rep.series.at("median_ms");
        for (size_t i = 0; i < sizes.size(); ++i)
            csv << sizes[i] << "," << med[i] << "\r\n";
    }
    std::cout << rep.to_json().dump(2) << "\n";
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nolab: neural-operator numerics and verification experiments"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Sample GRF inputs and target outputs");
    std::string g_target = "bessel-inverse", g_out;
    int g_grid = 64, g_dim = 1, g_samples = 8, g_band = -1;
    double g_alpha = 2.5, g_tau = 0.01, g_length = 1.0;
    std::uint64_t g_seed = 0;
    gen->add_option("--target", g_target,
                    "bessel-inverse | antiderivative | smoothed-tanh");
    gen->add_option("--grid", g_grid, "points per axis (power of two, >= 8)");
    gen->add_option("--dim", g_dim, "domain dimension (1 or 2)");
    gen->add_option("--n-samples", g_samples, "number of input/output pairs");
    gen->add_option("--alpha", g_alpha, "GRF spectral decay exponent (default 2.5)");
    gen->add_option("--tau", g_tau, "smoothing time for smoothed-tanh (default 0.01)");
    gen->add_option("--band-limit", g_band, "zero output modes above this band (-1: off)");
    gen->add_option("--length", g_length, "domain length per axis (default 1.0)");
    gen->add_option("--seed", g_seed, "master seed (default 0)");
    gen->add_option("--out", g_out, "output dataset path")->required();

    // train
    auto* tr = app.add_subcommand("train", "Fit an operator to a dataset");
    std::string t_config, t_data, t_out;
    tr->add_option("--config", t_config, "JSON config (strict keys)")->required();
    tr->add_option("--data", t_data, "dataset file")->required();
    tr->add_option("--out", t_out, "checkpoint output path")->required();

    // verify
    auto* ve = app.add_subcommand("verify", "Run a verification experiment");
    std::string v_name, v_config, v_model, v_out = "reports";
    bool v_quick = false;
    ve->add_option("experiment", v_name,
                   "stability|sensitivity|contraction|flow|clustering|universality|"
                   "generalization|capacity|nonconvexity|complexity|discretization|all")
        ->required();
    ve->add_option("--config", v_config, "JSON config overriding defaults (strict keys)");
    ve->add_option("--model", v_model, "checkpoint to verify instead of the built-in probe");
    ve->add_option("--out", v_out, "report directory (default: reports)");
    ve->add_flag("--quick", v_quick, "reduced-trial CI profile");

    // bench
    auto* be = app.add_subcommand("bench", "Time forward passes across grid sizes");
    std::string b_kernel = "spectral", b_out = "reports";
    std::vector<int> b_sizes = {256, 512, 1024, 2048, 4096};
    int b_reps = 20;
    std::uint64_t b_seed = 0;
    be->add_option("--kernel", b_kernel, "dense | spectral");
    be->add_option("--sizes", b_sizes, "comma-separated grid sizes")->delimiter(',');
    be->add_option("--reps", b_reps, "timing repetitions (median reported)");
    be->add_option("--seed", b_seed, "master seed");
    be->add_option("--out", b_out, "report directory (default: reports)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        (void)threads_cap();  // validate NOLAB_THREADS early
        if (gen->parsed())
            return cmd_gen_data(g_target, g_grid, g_dim, g_samples, g_alpha, g_tau,
                                g_band, g_seed, g_length, g_out);
        if (tr->parsed()) return cmd_train(t_config, t_data, t_out);
        if (ve->parsed()) return cmd_verify(v_name, v_config, v_model, v_out, v_quick);
        if (be->parsed()) return cmd_bench(b_kernel, b_sizes, b_reps, b_seed, b_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

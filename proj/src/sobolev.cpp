#include "nolab/sobolev.hpp"

#include <cmath>
#include <stdexcept>

#include "nolab/rng.hpp"

namespace nolab {

double hs_norm(const Field& f, double s) {
    if (s < 0.0) throw std::invalid_argument("hs_norm: s must be >= 0");
    const Spectrum sp = dft(f);
    const int N = f.grid.total();
    double vol = 1.0;
    for (int a = 0; a < f.grid.dim; ++a) vol *= f.grid.length;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        const double w = std::pow(1.0 + mode_omega2(f.grid, j), s);
        for (int c = 0; c < f.channels; ++c) acc += w * std::norm(sp.at(c, j));
    }
    return std::sqrt(acc * vol);
}

double derivative_sum_norm(const Field& f, int s_int) {
    if (s_int < 0) throw std::invalid_argument("derivative_sum_norm: s must be >= 0");
    const Spectrum sp = dft(f);
    const int N = f.grid.total();
    const int n = f.grid.n;
    double vol = 1.0;
    for (int a = 0; a < f.grid.dim; ++a) vol *= f.grid.length;
    const double freq = 2.0 * std::numbers::pi / f.grid.length;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        double w = 0.0;
        if (f.grid.dim == 1) {
            const double w2 = std::pow(freq * freq_of_index(j, n), 2);
            double term = 1.0;
            for (int m = 0; m <= s_int; ++m, term *= w2) w += term;
        } else {
            const double w2a = std::pow(freq * freq_of_index(j / n, n), 2);
            const double w2b = std::pow(freq * freq_of_index(j % n, n), 2);
            for (int a = 0; a <= s_int; ++a)
                for (int b = 0; a + b <= s_int; ++b)
                    w += std::pow(w2a, a) * std::pow(w2b, b);
        }
        for (int c = 0; c < f.channels; ++c) acc += w * std::norm(sp.at(c, j));
    }
    return std::sqrt(acc * vol);
}

double linf_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

EmbeddingReport embedding_ratio(const GrfSampler& sampler, const GridSpec& grid, double s,
                                int trials) {
    if (!(s > grid.dim / 2.0))
        throw std::invalid_argument("embedding_ratio: requires s > d/2");
    if (trials < 100) throw std::invalid_argument("embedding_ratio: trials must be >= 100");
    double running_max = 0.0;
    double half_max = 0.0;
    for (int t = 0; t < trials; ++t) {
        GrfSampler st = sampler;
        st.seed = derive_seed(sampler.seed, static_cast<std::uint64_t>(t));
        const Field u = sample_grf(st, grid);
        const double hs = hs_norm(u, s);
        if (hs == 0.0) continue;
        running_max = std::max(running_max, linf_norm(u) / hs);
        if (t == trials / 2 - 1) half_max = running_max;
    }
    EmbeddingReport rep;
    rep.s = s;
    rep.dim = grid.dim;
    rep.sampled_ratio_max = running_max;
    rep.trials = trials;
    rep.pass = half_max > 0.0 && running_max < 1.1 * half_max;
    return rep;
}

}  // namespace nolab

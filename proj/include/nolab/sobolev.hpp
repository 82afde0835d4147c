#pragma once

#include "nolab/grid.hpp"

namespace nolab {

struct EmbeddingReport {
    double s = 0.0;
    int dim = 1;
    double sampled_ratio_max = 0.0;  // estimated lower bound on the embedding constant
    int trials = 0;
    bool pass = false;
};

// H^s norm in the Bessel spectral form:
// sqrt( sum_k (1+|2 pi k/length|^2)^s |c_k|^2 * length^d ), summed over channels.
double hs_norm(const Field& f, double s);

// Literal derivative-sum form for integer s, derivatives taken spectrally:
// sqrt( sum_{|alpha| <= s} ||D^alpha u||_{L2}^2 ). Equals hs_norm for d=1, s=1.
double derivative_sum_norm(const Field& f, int s_int);

double linf_norm(const Field& f);

// Monte-Carlo estimate of the L^inf / H^s ratio over GRF samples (s > d/2).
// pass: running max over the final half of trials grows by < 10%.
EmbeddingReport embedding_ratio(const GrfSampler& sampler, const GridSpec& grid, double s,
                                int trials);

}  // namespace nolab

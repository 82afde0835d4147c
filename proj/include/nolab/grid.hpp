#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nolab {

// Uniform periodic grid on the d-torus, d in {1,2}. n points per axis.
struct GridSpec {
    int dim = 1;
    int n = 8;
    double length = 1.0;

    int total() const {
        int N = n;
        for (int i = 1; i < dim; ++i) N *= n;
        return N;
    }
    double spacing() const { return length / n; }
    // quadrature weight h^d
    double cell_volume() const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= spacing();
        return v;
    }
    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(int dim, int n, double length = 1.0);

// Real channel-valued function sampled on a grid. Channel-major storage:
// values[c*N + j], row-major over grid points (j = iy*n + ix in 2D).
struct Field {
    GridSpec grid;
    int channels = 1;
    std::vector<double> values;

    Field() = default;
    Field(const GridSpec& g, int ch)
        : grid(g), channels(ch), values(static_cast<size_t>(ch) * g.total(), 0.0) {}

    double& at(int c, int j) { return values[static_cast<size_t>(c) * grid.total() + j]; }
    double at(int c, int j) const { return values[static_cast<size_t>(c) * grid.total() + j]; }
    std::span<double> channel(int c) {
        return {values.data() + static_cast<size_t>(c) * grid.total(),
                static_cast<size_t>(grid.total())};
    }
    std::span<const double> channel(int c) const {
        return {values.data() + static_cast<size_t>(c) * grid.total(),
                static_cast<size_t>(grid.total())};
    }
};

// Discrete Fourier coefficients of a Field, same layout, complex entries.
// Normalization: coeffs[0] equals the mean of the field.
struct Spectrum {
    GridSpec grid;
    int channels = 1;
    std::vector<std::complex<double>> coeffs;

    Spectrum() = default;
    Spectrum(const GridSpec& g, int ch)
        : grid(g), channels(ch), coeffs(static_cast<size_t>(ch) * g.total()) {}

    std::complex<double>& at(int c, int j) {
        return coeffs[static_cast<size_t>(c) * grid.total() + j];
    }
    std::complex<double> at(int c, int j) const {
        return coeffs[static_cast<size_t>(c) * grid.total() + j];
    }
};

// Integer frequency of a flat storage index along one axis: k in [-n/2, n/2).
inline int freq_of_index(int j, int n) { return j < n / 2 ? j : j - n; }
inline int index_of_freq(int k, int n) { return k >= 0 ? k : k + n; }

// |2*pi*k / length|^2 for the mode at flat index j.
double mode_omega2(const GridSpec& g, int j);

Spectrum dft(const Field& f);
Field idft(const Spectrum& s);

// h^d * sum_j sum_c f_c(x_j) g_c(x_j)
double quadrature_inner(const Field& f, const Field& g);
double l2_norm(const Field& f);

// Gaussian random field sampler: independent complex-Gaussian spectral
// coefficients with std amplitude*(1+|2 pi k/length|^2)^(-alpha/2).
struct GrfSampler {
    double alpha = 2.5;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

Field sample_grf(const GrfSampler& s, const GridSpec& grid, int channels = 1);

// Spectral resolution change: zero-padding up, mode truncation down.
Field resample(const Field& f, int new_n);

// Test/plumbing helpers.
Field field_from_function(const GridSpec& g, const std::function<double(double, double)>& fn);
Field field_scale(const Field& f, double c);
Field field_add(const Field& a, const Field& b, double bscale = 1.0);
bool field_finite(const Field& f);

}  // namespace nolab

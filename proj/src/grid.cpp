#include "nolab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nolab/rng.hpp"

namespace nolab {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, in place. sign = -1 forward, +1 inverse (unscaled).
void fft_pow2(std::complex<double>* a, int n, int sign) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / len;
        const int half = len / 2;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                // direct twiddle keeps round-off flat across stages
                const std::complex<double> w = std::polar(1.0, ang * j);
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + half] * w;
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

// d-dimensional FFT over the flat row-major layout.
void fft_nd(std::complex<double>* a, const GridSpec& g, int sign) {
    const int n = g.n;
    if (g.dim == 1) {
        fft_pow2(a, n, sign);
        return;
    }
    // rows
    for (int r = 0; r < n; ++r) fft_pow2(a + static_cast<size_t>(r) * n, n, sign);
    // columns
    std::vector<std::complex<double>> col(n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) col[r] = a[static_cast<size_t>(r) * n + c];
        fft_pow2(col.data(), n, sign);
        for (int r = 0; r < n; ++r) a[static_cast<size_t>(r) * n + c] = col[r];
    }
}

void axis_freqs(const GridSpec& g, int j, int* k) {
    if (g.dim == 1) {
        k[0] = freq_of_index(j, g.n);
    } else {
        k[0] = freq_of_index(j / g.n, g.n);
        k[1] = freq_of_index(j % g.n, g.n);
    }
}

}  // namespace

GridSpec make_grid(int dim, int n, double length) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("make_grid: dim must be 1 or 2");
    if (n < 8 || !is_pow2(n))
        throw std::invalid_argument("make_grid: n must be a power of two >= 8");
    if (!(length > 0.0)) throw std::invalid_argument("make_grid: length must be positive");
    return GridSpec{dim, n, length};
}

double mode_omega2(const GridSpec& g, int j) {
    int k[2] = {0, 0};
    axis_freqs(g, j, k);
    const double f = 2.0 * std::numbers::pi / g.length;
    double w2 = 0.0;
    for (int a = 0; a < g.dim; ++a) w2 += (f * k[a]) * (f * k[a]);
    return w2;
}

Spectrum dft(const Field& f) {
    if (!field_finite(f)) throw std::invalid_argument("dft: field has non-finite values");
    const int N = f.grid.total();
    Spectrum s(f.grid, f.channels);
    for (int c = 0; c < f.channels; ++c) {
        auto* out = s.coeffs.data() + static_cast<size_t>(c) * N;
        const auto in = f.channel(c);
        for (int j = 0; j < N; ++j) out[j] = in[j];
        fft_nd(out, f.grid, -1);
        for (int j = 0; j < N; ++j) out[j] /= N;
    }
    return s;
}

Field idft(const Spectrum& s) {
    const int N = s.grid.total();
    Field f(s.grid, s.channels);
    std::vector<std::complex<double>> buf(N);
    for (int c = 0; c < s.channels; ++c) {
        const auto* in = s.coeffs.data() + static_cast<size_t>(c) * N;
        std::copy(in, in + N, buf.begin());
        fft_nd(buf.data(), s.grid, +1);
        auto out = f.channel(c);
        for (int j = 0; j < N; ++j) out[j] = buf[j].real();
    }
    return f;
}

double quadrature_inner(const Field& f, const Field& g) {
    if (f.grid != g.grid || f.channels != g.channels)
        throw std::invalid_argument("quadrature_inner: grid/channel mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) acc += f.values[i] * g.values[i];
    return acc * f.grid.cell_volume();
}

double l2_norm(const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v * v;
    return std::sqrt(acc * f.grid.cell_volume());
}

Field sample_grf(const GrfSampler& s, const GridSpec& grid, int channels) {
    if (!(s.alpha > 0.0)) throw std::invalid_argument("sample_grf: alpha must be positive");
    if (s.amplitude < 0.0) throw std::invalid_argument("sample_grf: amplitude must be >= 0");
    const int N = grid.total();
    const int n = grid.n;
    Rng rng(derive_seed(s.seed, static_cast<std::uint64_t>(grid.dim) * 1000003 +
                                    static_cast<std::uint64_t>(grid.n)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    Spectrum sp(grid, channels);
    for (int c = 0; c < channels; ++c) {
        for (int j = 0; j < N; ++j) {
            // flat index of the conjugate partner (-k mod n per axis)
            int partner;
            if (grid.dim == 1) {
                partner = (n - j) % n;
            } else {
                const int r = j / n, col = j % n;
                partner = ((n - r) % n) * n + (n - col) % n;
            }
            if (j > partner) continue;  // filled when partner was visited
            const double std_k =
                s.amplitude * std::pow(1.0 + mode_omega2(grid, j), -s.alpha / 2.0);
            if (j == partner) {
                sp.at(c, j) = std_k * gauss(rng);
            } else {
                const std::complex<double> z(gauss(rng), gauss(rng));
                sp.at(c, j) = std_k * inv_sqrt2 * z;
                sp.at(c, partner) = std::conj(sp.at(c, j));
            }
        }
    }
    return idft(sp);
}

namespace {

// Per-axis mode redistribution for spectral resampling. Appends
// (target_freq, weight) pairs for a source frequency k.
void axis_targets(int k, int n_src, int n_dst, std::pair<int, double> out[2], int& count) {
    count = 0;
    if (n_dst >= n_src) {
        if (k == -n_src / 2) {
            // Nyquist splits across +/- n_src/2 on the finer grid
            out[count++] = {-n_src / 2, 0.5};
            out[count++] = {n_src / 2, 0.5};
        } else {
            out[count++] = {k, 1.0};
        }
    } else {
        const int m = n_dst;
        if (std::abs(k) < m / 2) {
            out[count++] = {k, 1.0};
        } else if (k == -m / 2 || k == m / 2) {
            out[count++] = {-m / 2, 1.0};  // fold onto the coarse Nyquist
        }
        // |k| > m/2: truncated
    }
}

}  // namespace

Field resample(const Field& f, int new_n) {
    if (new_n < 8 || !is_pow2(new_n))
        throw std::invalid_argument("resample: new_n must be a power of two >= 8");
    if (new_n == f.grid.n) return f;
    const GridSpec dst{f.grid.dim, new_n, f.grid.length};
    const Spectrum src = dft(f);
    Spectrum out(dst, f.channels);
    const int n = f.grid.n;
    const int N = f.grid.total();
    std::pair<int, double> t0[2], t1[2];
    int c0, c1;
    for (int c = 0; c < f.channels; ++c) {
        for (int j = 0; j < N; ++j) {
            const std::complex<double> v = src.at(c, j);
            if (v == 0.0) continue;
            if (f.grid.dim == 1) {
                axis_targets(freq_of_index(j, n), n, new_n, t0, c0);
                for (int a = 0; a < c0; ++a)
                    out.at(c, index_of_freq(t0[a].first, new_n)) += t0[a].second * v;
            } else {
                axis_targets(freq_of_index(j / n, n), n, new_n, t0, c0);
                axis_targets(freq_of_index(j % n, n), n, new_n, t1, c1);
                for (int a = 0; a < c0; ++a)
                    for (int b = 0; b < c1; ++b)
                        out.at(c, index_of_freq(t0[a].first, new_n) * new_n +
                                      index_of_freq(t1[b].first, new_n)) +=
                            t0[a].second * t1[b].second * v;
            }
        }
    }
    return idft(out);
}

Field field_from_function(const GridSpec& g,
                          const std::function<double(double, double)>& fn) {
    Field f(g, 1);
    const double h = g.spacing();
    if (g.dim == 1) {
        for (int j = 0; j < g.n; ++j) f.at(0, j) = fn(j * h, 0.0);
    } else {
        for (int r = 0; r < g.n; ++r)
            for (int c = 0; c < g.n; ++c) f.at(0, r * g.n + c) = fn(c * h, r * h);
    }
    return f;
}

Field field_scale(const Field& f, double c) {
    Field out = f;
    for (double& v : out.values) v *= c;
    return out;
}

Field field_add(const Field& a, const Field& b, double bscale) {
    if (a.grid != b.grid || a.channels != b.channels)
        throw std::invalid_argument("field_add: grid/channel mismatch");
    Field out = a;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += bscale * b.values[i];
    return out;
}

bool field_finite(const Field& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace nolab

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "nolab/grid.hpp"

using namespace nolab;

namespace {

constexpr double pi = std::numbers::pi;

// O(N^2) reference transform with the same normalization (coeff 0 = mean)
Spectrum naive_dft(const Field& f) {
    const int n = f.grid.n;
    const int N = f.grid.total();
    Spectrum s(f.grid, f.channels);
    for (int c = 0; c < f.channels; ++c) {
        for (int j = 0; j < N; ++j) {
            std::complex<double> acc = 0.0;
            for (int x = 0; x < N; ++x) {
                double phase;
                if (f.grid.dim == 1) {
                    phase = -2.0 * pi * double(j) * double(x) / n;
                } else {
                    const int jy = j / n, jx = j % n;
                    const int xy = x / n, xx = x % n;
                    phase = -2.0 * pi * (double(jy) * xy + double(jx) * xx) / n;
                }
                acc += f.at(c, x) * std::polar(1.0, phase);
            }
            s.at(c, j) = acc / double(N);
        }
    }
    return s;
}

Field random_field(const GridSpec& g, std::uint64_t seed, int channels = 1) {
    return sample_grf({1.0, 1.0, seed}, g, channels);
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_NOTHROW(make_grid(1, 8));
    CHECK_NOTHROW(make_grid(2, 64, 2.0));
    CHECK_THROWS(make_grid(3, 8));
    CHECK_THROWS(make_grid(1, 100));
    CHECK_THROWS(make_grid(1, 4));
    CHECK_THROWS(make_grid(1, 8, 0.0));
    CHECK_THROWS(make_grid(1, 8, -1.0));
}

TEST_CASE("dft matches the quadratic-time reference") {
    for (int dim : {1, 2}) {
        const GridSpec g = make_grid(dim, dim == 1 ? 16 : 8, 1.0);
        const Field f = random_field(g, 42 + dim, 2);
        const Spectrum fast = dft(f);
        const Spectrum slow = naive_dft(f);
        for (size_t i = 0; i < fast.coeffs.size(); ++i)
            CHECK(std::abs(fast.coeffs[i] - slow.coeffs[i]) < 1e-12);
    }
}

TEST_CASE("idft inverts dft") {
    for (int dim : {1, 2}) {
        const GridSpec g = make_grid(dim, 16, 1.5);
        const Field f = random_field(g, 7, 3);
        const Field back = idft(dft(f));
        for (size_t i = 0; i < f.values.size(); ++i)
            CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("known coefficients of sin and cos") {
    const GridSpec g = make_grid(1, 32, 1.0);
    const Field s = field_from_function(g, [](double x, double) { return std::sin(2 * pi * x); });
    const Spectrum ss = dft(s);
    CHECK(std::abs(ss.at(0, 1) - std::complex<double>(0.0, -0.5)) < 1e-13);
    CHECK(std::abs(ss.at(0, 31) - std::complex<double>(0.0, 0.5)) < 1e-13);
    CHECK(std::abs(ss.at(0, 0)) < 1e-13);

    const Field c = field_from_function(g, [](double x, double) { return std::cos(2 * pi * x); });
    const Spectrum cs = dft(c);
    CHECK(std::abs(cs.at(0, 1) - std::complex<double>(0.5, 0.0)) < 1e-13);
    CHECK(std::abs(cs.at(0, 31) - std::complex<double>(0.5, 0.0)) < 1e-13);
}

TEST_CASE("frequency indexing") {
    CHECK(freq_of_index(0, 8) == 0);
    CHECK(freq_of_index(3, 8) == 3);
    CHECK(freq_of_index(4, 8) == -4);
    CHECK(freq_of_index(7, 8) == -1);
    for (int k = -4; k < 4; ++k) CHECK(freq_of_index(index_of_freq(k, 8), 8) == k);
}

TEST_CASE("Parseval identity over random fields") {
    const GridSpec g = make_grid(1, 64, 2.0);
    for (int t = 0; t < 50; ++t) {
        const Field f = random_field(g, 100 + t);
        const Spectrum s = dft(f);
        double spec = 0.0;
        for (const auto& c : s.coeffs) spec += std::norm(c);
        spec *= g.length;  // length^d
        const double direct = l2_norm(f) * l2_norm(f);
        CHECK(spec == doctest::Approx(direct).epsilon(1e-11));
    }
}

TEST_CASE("quadrature inner products") {
    const GridSpec g = make_grid(1, 64, 1.0);
    const Field s = field_from_function(g, [](double x, double) { return std::sin(2 * pi * x); });
    const Field c = field_from_function(g, [](double x, double) { return std::cos(2 * pi * x); });
    CHECK(quadrature_inner(s, s) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(quadrature_inner(s, c) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(l2_norm(s) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
}

TEST_CASE("GRF sampling is deterministic in the seed") {
    const GridSpec g = make_grid(2, 16, 1.0);
    const GrfSampler a{2.5, 1.0, 99};
    const Field f1 = sample_grf(a, g, 2);
    const Field f2 = sample_grf(a, g, 2);
    CHECK(f1.values == f2.values);
    CHECK(field_finite(f1));
    const Field f3 = sample_grf({2.5, 1.0, 100}, g, 2);
    CHECK(f1.values != f3.values);
}

TEST_CASE("GRF spectral decay follows the amplitude law") {
    // higher alpha concentrates energy in low modes
    const GridSpec g = make_grid(1, 64, 1.0);
    double rough = 0.0, smooth = 0.0;
    for (int t = 0; t < 40; ++t) {
        const Spectrum r = dft(sample_grf({0.5, 1.0, std::uint64_t(t)}, g));
        const Spectrum s = dft(sample_grf({3.5, 1.0, std::uint64_t(t)}, g));
        for (int j = 16; j < 48; ++j) {
            rough += std::norm(r.at(0, j));
            smooth += std::norm(s.at(0, j));
        }
    }
    CHECK(rough > 100.0 * smooth);
}

TEST_CASE("resample preserves live modes exactly") {
    const GridSpec g = make_grid(1, 16, 1.0);
    const Field f = field_from_function(
        g, [](double x, double) { return 2.0 + std::sin(2 * pi * x) + 0.3 * std::cos(6 * pi * x); });
    const Field up = resample(f, 64);
    CHECK(up.grid.n == 64);
    const Field check = field_from_function(
        up.grid, [](double x, double) { return 2.0 + std::sin(2 * pi * x) + 0.3 * std::cos(6 * pi * x); });
    for (size_t i = 0; i < up.values.size(); ++i)
        CHECK(up.values[i] == doctest::Approx(check.values[i]).epsilon(1e-12));

    const Field down = resample(up, 16);
    for (size_t i = 0; i < f.values.size(); ++i)
        CHECK(down.values[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
}

TEST_CASE("resample round-trip in 2D") {
    const GridSpec g = make_grid(2, 8, 1.0);
    const Field f = random_field(g, 5);
    const Field round = resample(resample(f, 32), 8);
    for (size_t i = 0; i < f.values.size(); ++i)
        CHECK(round.values[i] == doctest::Approx(f.values[i]).epsilon(1e-11));
}

TEST_CASE("mode_omega2 matches the analytic multiplier") {
    const GridSpec g = make_grid(1, 8, 2.0);
    CHECK(mode_omega2(g, 0) == doctest::Approx(0.0));
    CHECK(mode_omega2(g, 1) == doctest::Approx(std::pow(2 * pi * 1 / 2.0, 2)));
    CHECK(mode_omega2(g, 7) == doctest::Approx(std::pow(2 * pi * 1 / 2.0, 2)));
    CHECK(mode_omega2(g, 4) == doctest::Approx(std::pow(2 * pi * 4 / 2.0, 2)));
}

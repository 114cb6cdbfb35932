#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/observables.hpp"
#include "support.hpp"

using namespace qsync;

namespace {

constexpr double kLn2Pi = 1.8378770664093453;

DensityMatrix diagonal_state(const std::vector<double>& p) {
    ComplexMatrix m = ComplexMatrix::Zero(p.size(), p.size());
    for (std::size_t n = 0; n < p.size(); ++n) m(n, n) = p[n];
    return DensityMatrix::from_matrix(m);
}

DensityMatrix rotate(const DensityMatrix& rho, double theta) {
    ComplexMatrix m = rho.matrix();
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c) m(r, c) *= std::polar(1.0, theta * (r - c));
    return DensityMatrix::from_matrix(m);
}

// Hermite functions psi_n(x) = <x|n> for a = (x + i p)/sqrt(2).
std::vector<double> hermite_functions(double x, int nmax) {
    std::vector<double> psi(nmax + 1);
    psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2);
    if (nmax >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int n = 2; n <= nmax; ++n)
        psi[n] = std::sqrt(2.0 / n) * x * psi[n - 1] - std::sqrt((n - 1.0) / n) * psi[n - 2];
    return psi;
}

}  // namespace

TEST_CASE("number distribution") {
    auto p = number_distribution(number_state(3, 10)).p;
    for (int n = 0; n <= 10; ++n) CHECK(p[n] == (n == 3 ? 1.0 : 0.0));

    auto q = number_distribution(coherent_state(2.0, 30)).p;
    double fact = 1.0;
    for (int n = 0; n <= 30; ++n) {
        if (n) fact *= n;
        CHECK(std::abs(q[n] - std::exp(-4.0) * std::pow(4.0, n) / fact) < 1e-8);
    }
}

TEST_CASE("negative populations are rejected") {
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    m(0, 0) = 1.1;
    m(1, 1) = -0.1;
    try {
        number_distribution(DensityMatrix::from_matrix(m));
        FAIL("expected positivity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Positivity);
    }
}

TEST_CASE("most probable n") {
    CHECK(most_probable_n({{0.0, 0.0, 0.0, 1.0}}) == 3);
    CHECK(most_probable_n({{0.5, 0.5}}) == 0);
    CHECK(most_probable_n(number_distribution(coherent_state(2.75, 40))) == 7);
}

TEST_CASE("phase distribution of a number state is flat") {
    auto d = phase_distribution(number_state(5, 12), 64);
    REQUIRE(d.values.size() == 64);
    for (double v : d.values) CHECK(std::abs(v - 1.0 / (2 * std::numbers::pi)) < 1e-15);
    CHECK(d.grid.front() == doctest::Approx(-std::numbers::pi));
    CHECK(d.spacing() == doctest::Approx(2 * std::numbers::pi / 64));
    CHECK(std::abs(entropic_phase_uncertainty(d) - kLn2Pi) < 1e-9);
}

TEST_CASE("phase distribution of a real coherent state") {
    const int M = 1024;
    auto d = phase_distribution(coherent_state(2.75, 40), M);
    // grid[k] = -pi + 2 pi k / M, so phi = 0 sits at k = M/2 and -phi_k at M - k.
    int peak = 0;
    for (int k = 0; k < M; ++k)
        if (d.values[k] > d.values[peak]) peak = k;
    CHECK(peak == M / 2);
    for (int k = 1; k < M; ++k) CHECK(std::abs(d.values[k] - d.values[M - k]) < 1e-10);
}

TEST_CASE("phase distribution normalisation and aliasing guard") {
    for (unsigned seed = 0; seed < 5; ++seed) {
        auto rho = test::random_density_matrix(20, seed, 0.9);
        auto d = phase_distribution(rho, default_phase_grid_size(20));
        double sum = 0.0, lo = 1.0;
        for (double v : d.values) {
            sum += v * d.spacing();
            lo = std::min(lo, v);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        CHECK(lo >= -1e-10);
    }
    CHECK_THROWS_AS(phase_distribution(number_state(0, 20), 40), Error);
    CHECK_NOTHROW(phase_distribution(number_state(0, 20), 41));
    CHECK(default_phase_grid_size(10) == 1024);
    CHECK(default_phase_grid_size(200) == 1608);
}

TEST_CASE("phase distribution rotates rigidly with the state") {
    const int M = 512;
    auto rho = coherent_state({1.2, -0.7}, 30);
    const int shift = 37;
    auto rot = rotate(rho, 2 * std::numbers::pi * shift / M);
    auto a = phase_distribution(rho, M), b = phase_distribution(rot, M);
    for (int k = 0; k < M; ++k) CHECK(std::abs(b.values[(k + shift) % M] - a.values[k]) < 1e-12);
}

TEST_CASE("entropic number uncertainty") {
    CHECK(entropic_number_uncertainty(number_distribution(number_state(4, 9))) == 0.0);
    for (int k : {1, 2, 5, 17}) {
        NumberDistribution u{std::vector<double>(k, 1.0 / k)};
        CHECK(std::abs(entropic_number_uncertainty(u) - std::log(k)) < 1e-14);
    }
    CHECK(entropic_number_uncertainty({{0.5, 0.5, -5e-11}}) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(entropic_number_uncertainty({{0.5, 0.5, -1e-8}}), Error);
}

TEST_CASE("coherent-state phase entropy against a fine quadrature") {
    auto rho = coherent_state(2.75, 40);
    const double fine = entropic_phase_uncertainty(phase_distribution(rho, 1 << 16));
    const double dflt = entropic_phase_uncertainty(phase_distribution(rho, default_phase_grid_size(40)));
    CHECK(fine < kLn2Pi);
    CHECK(std::abs(dflt - fine) < 1e-9);
}

TEST_CASE("diagonal states have flat phase and maximal phase entropy") {
    auto p = exact_unsynchronised_steady_state(0.04, 90);
    auto rho = diagonal_state(p);
    auto d = phase_distribution(rho, default_phase_grid_size(90));
    CHECK(std::abs(entropic_phase_uncertainty(d) - kLn2Pi) < 1e-9);
}

TEST_CASE("entropic uncertainty relation on random states") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        auto rho = test::random_density_matrix(15, seed, 0.3 + 0.03 * seed);
        const double dphi = entropic_phase_uncertainty(phase_distribution(rho, default_phase_grid_size(15)));
        const double dn = entropic_number_uncertainty(number_distribution(rho));
        CHECK(dphi + dn >= kLn2Pi - 1e-9);
    }
    for (double r : {0.5, 1.5, 3.0}) {
        auto rho = coherent_state(r, coherent_cutoff_rule(r));
        const double dphi = entropic_phase_uncertainty(phase_distribution(rho, default_phase_grid_size(rho.nmax())));
        const double dn = entropic_number_uncertainty(number_distribution(rho));
        CHECK(dphi + dn >= kLn2Pi - 1e-9);
    }
}

TEST_CASE("vacuum Wigner function") {
    auto axis = symmetric_axis(6.0, 121);
    auto w = wigner(number_state(0, 4), axis, axis);
    CHECK(std::abs(w.values(60, 60) - 1.0 / std::numbers::pi) < 1e-10);
    for (int i = 0; i < 121; i += 7)
        for (int j = 0; j < 121; j += 5) {
            const double x = axis[i], p = axis[j];
            CHECK(std::abs(w.values(i, j) - std::exp(-(x * x + p * p)) / std::numbers::pi) < 1e-12);
        }
    CHECK(std::abs(w.integral() - 1.0) < 1e-6);
}

TEST_CASE("coherent-state Wigner function is a displaced Gaussian") {
    const Complex alpha(1.3, -0.9);
    auto rho = coherent_state(alpha, 30);
    auto axis = symmetric_axis(wigner_extent(30), 81);
    auto w = wigner(rho, axis, axis);
    const double x0 = std::sqrt(2.0) * alpha.real(), p0 = std::sqrt(2.0) * alpha.imag();
    double err = 0.0;
    for (int i = 0; i < 81; ++i)
        for (int j = 0; j < 81; ++j) {
            const double dx = axis[i] - x0, dp = axis[j] - p0;
            err = std::max(err, std::abs(w.values(i, j) - std::exp(-(dx * dx + dp * dp)) / std::numbers::pi));
        }
    CHECK(err < 1e-10);
    CHECK(std::abs(w.integral() - 1.0) < 1e-6);
}

TEST_CASE("Wigner marginal equals the x-quadrature distribution") {
    const int nmax = 12;
    auto rho = test::random_density_matrix(nmax, 4, 0.8);
    auto xs = symmetric_axis(wigner_extent(nmax), 41);
    auto ps = symmetric_axis(12.0, 481);
    auto w = wigner(rho, xs, ps);
    const double dp = ps[1] - ps[0];
    for (int i = 0; i < 41; ++i) {
        double marginal = 0.0;
        for (int j = 0; j < 481; ++j) marginal += w.values(i, j) * dp;
        auto psi = hermite_functions(xs[i], nmax);
        double direct = 0.0;
        for (int m = 0; m <= nmax; ++m)
            for (int n = 0; n <= nmax; ++n) direct += (rho(m, n) * psi[m] * psi[n]).real();
        CHECK(std::abs(marginal - direct) < 1e-6);
    }
}

TEST_CASE("diagonal-state Wigner function is rotationally invariant") {
    auto rho = diagonal_state(exact_unsynchronised_steady_state(0.04, 90));
    const double r0 = 3.0;
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k < 24; ++k) {
        const double th = 2 * std::numbers::pi * k / 24;
        const double w = wigner_value(rho, r0 * std::cos(th), r0 * std::sin(th));
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    CHECK(lo > 0.0);
    CHECK(hi - lo < 1e-8);
    CHECK(wigner_value(rho, 0.0, 0.0) < lo);  // ring with a dip in the middle
}

TEST_CASE("Wigner grid too small fails normalisation") {
    auto rho = coherent_state(3.0, 45);
    auto axis = symmetric_axis(2.0, 41);
    try {
        wigner(rho, axis, axis);
        FAIL("expected normalisation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Normalization);
    }
}

#pragma once

// Shared helpers for the unit tests: random states and an independent
// element-wise evaluation of the mean-field master equation.

#include <algorithm>
#include <cmath>
#include <random>

#include "qsync/fock.hpp"

namespace qsync::test {

inline double max_anti_hermitian(const ComplexMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// rho = G G^dag / Tr, with the weight of high n suppressed so that the state
/// stays away from the cutoff.
inline DensityMatrix random_density_matrix(int nmax, unsigned seed, double decay = 0.6) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    const int d = nmax + 1;
    ComplexMatrix g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = Complex(gauss(rng), gauss(rng)) * std::pow(decay, r);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    return DensityMatrix::from_matrix(rho, 1e-12);
}

/// <m|(L rho)|n> written out term by term from the matrix elements
/// a|k> = sqrt(k)|k-1>, a^dag|k> = sqrt(k+1)|k+1>, truncated at nmax.
inline ComplexMatrix brute_force_rhs(const ComplexMatrix& rho, double k1, double k2, double eps) {
    const int d = static_cast<int>(rho.rows());
    const int nmax = d - 1;
    auto at = [&](int r, int c) -> Complex {
        return (r < 0 || c < 0 || r > nmax || c > nmax) ? Complex{} : rho(r, c);
    };
    auto sq = [](int k) { return std::sqrt(static_cast<double>(k)); };
    // Truncated a a^dag has eigenvalue k+1 except 0 at nmax.
    auto aad = [&](int k) { return k < nmax ? k + 1.0 : 0.0; };
    auto nn1 = [](int k) { return k * (k - 1.0); };

    Complex a{};
    for (int k = 0; k < nmax; ++k) a += sq(k + 1) * rho(k + 1, k);

    ComplexMatrix out(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            Complex v{};
            // 2 a^dag rho a
            if (m >= 1 && n >= 1) v += 2.0 * k1 * sq(m) * sq(n) * at(m - 1, n - 1);
            v -= k1 * (aad(m) + aad(n)) * at(m, n);
            // 2 a^2 rho a^dag^2
            if (m + 2 <= nmax && n + 2 <= nmax)
                v += 2.0 * k2 * sq(m + 1) * sq(m + 2) * sq(n + 1) * sq(n + 2) * at(m + 2, n + 2);
            v -= k2 * (nn1(m) + nn1(n)) * at(m, n);
            // -i eps [<a> a^dag + <a>^* a, rho]
            Complex h{};
            if (m >= 1) h += a * sq(m) * at(m - 1, n);
            if (m + 1 <= nmax) h += std::conj(a) * sq(m + 1) * at(m + 1, n);
            if (n + 1 <= nmax) h -= a * sq(n + 1) * at(m, n + 1);
            if (n >= 1) h -= std::conj(a) * sq(n) * at(m, n - 1);
            v += Complex(0.0, -eps) * h;
            out(m, n) = v;
        }
    }
    return out;
}

}  // namespace qsync::test

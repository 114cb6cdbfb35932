#include "band_kernel.hpp"

#include <cmath>

namespace qsync::detail {

namespace {

// Plain complex product; avoids the NaN-recovery path of operator* so the
// loops below vectorise.
inline Complex cmul(Complex a, Complex b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace

BandLayout::BandLayout(int nmax) : nmax_(nmax), offset_(nmax + 3) {
    std::size_t off = 0;
    // One extra empty band (k = nmax+1) so band k+1 always exists.
    for (int k = 0; k <= nmax + 1; ++k) {
        offset_[k] = off;
        off += static_cast<std::size_t>(std::max(0, dim() - k) + 2 * kPad);
    }
    offset_[nmax + 2] = off;
    size_ = off;
}

BandData to_bands(const BandLayout& layout, const ComplexMatrix& m) {
    BandData d(layout.size(), Complex(0.0, 0.0));
    for (int k = 0; k <= layout.nmax(); ++k) {
        for (int i = 0; i < layout.band_length(k); ++i) {
            d[layout.index(k, i)] = m(i, i + k);
        }
    }
    return d;
}

ComplexMatrix from_bands(const BandLayout& layout, const BandData& d) {
    ComplexMatrix m(layout.dim(), layout.dim());
    for (int k = 0; k <= layout.nmax(); ++k) {
        for (int i = 0; i < layout.band_length(k); ++i) {
            const Complex v = d[layout.index(k, i)];
            if (k == 0) {
                m(i, i) = Complex(v.real(), 0.0);
            } else {
                m(i, i + k) = v;
                m(i + k, i) = std::conj(v);
            }
        }
    }
    return m;
}

MeanFieldGenerator::MeanFieldGenerator(int nmax, double kappa1, double kappa2)
    : layout_(nmax),
      sqrt_(nmax + 3),
      rate_(layout_.size(), 0.0),
      gain_(layout_.size(), 0.0),
      loss_(layout_.size(), 0.0) {
    for (int j = 0; j < nmax + 3; ++j) sqrt_[j] = std::sqrt(static_cast<double>(j));
    // Diagonal of the truncated a a^dag: j+1 below the cutoff, 0 at nmax.
    auto aad = [nmax](int j) { return j < nmax ? static_cast<double>(j + 1) : 0.0; };
    for (int k = 0; k <= nmax; ++k) {
        for (int m = 0; m < layout_.band_length(k); ++m) {
            const int n = m + k;
            const std::size_t i = layout_.index(k, m);
            rate_[i] = kappa1 * (aad(m) + aad(n)) +
                       kappa2 * (static_cast<double>(m) * (m - 1) + static_cast<double>(n) * (n - 1));
            gain_[i] = 2.0 * kappa1 * std::sqrt(static_cast<double>(m) * n);
            if (n + 2 <= nmax) {
                loss_[i] = 2.0 * kappa2 *
                           std::sqrt(static_cast<double>(m + 1) * (m + 2) * (n + 1) * (n + 2));
            }
        }
    }
}

void MeanFieldGenerator::apply(const BandData& rho, Complex eps_times_a, BandData& out) const {
    const int nmax = layout_.nmax();
    // -i[H, rho](m,n) = c  (sqrt(m) rho(m-1,n) - sqrt(n+1) rho(m,n+1))
    //                 + c2 (sqrt(m+1) rho(m+1,n) - sqrt(n) rho(m,n-1))
    const Complex c(eps_times_a.imag(), -eps_times_a.real());  // -i eps A
    const Complex c2(-eps_times_a.imag(), -eps_times_a.real());  // -i eps A^*
    const double* s = sqrt_.data();

    // k = 0: rho(m+1, m) and rho(m, m-1) come from band 1 by conjugation.
    {
        const Complex* cur = rho.data() + layout_.index(0, 0);
        const Complex* up = rho.data() + layout_.index(1, 0);
        const double* rate = rate_.data() + layout_.index(0, 0);
        const double* gain = gain_.data() + layout_.index(0, 0);
        const double* loss = loss_.data() + layout_.index(0, 0);
        Complex* o = out.data() + layout_.index(0, 0);
        for (int m = 0; m <= nmax; ++m) {
            const Complex x = s[m] * up[m - 1] - s[m + 1] * up[m];
            // Diagonal: c x + c2 conj(-x)... equals 2 Re(c x).
            const double h = 2.0 * cmul(c, x).real();
            const double d = gain[m] * cur[m - 1].real() + loss[m] * cur[m + 2].real() -
                             rate[m] * cur[m].real();
            o[m] = Complex(d + h, 0.0);
        }
    }
    for (int k = 1; k <= nmax; ++k) {
        const int len = layout_.band_length(k);
        const Complex* cur = rho.data() + layout_.index(k, 0);
        const Complex* up = rho.data() + layout_.index(k + 1, 0);
        const Complex* dn = rho.data() + layout_.index(k - 1, 0);
        const double* rate = rate_.data() + layout_.index(k, 0);
        const double* gain = gain_.data() + layout_.index(k, 0);
        const double* loss = loss_.data() + layout_.index(k, 0);
        Complex* o = out.data() + layout_.index(k, 0);
        const double* sn = s + k;  // sqrt(n) with n = m + k
        for (int m = 0; m < len; ++m) {
            const Complex x = s[m] * up[m - 1] - sn[m + 1] * up[m];
            const Complex y = s[m + 1] * dn[m + 1] - sn[m] * dn[m];
            o[m] = gain[m] * cur[m - 1] + loss[m] * cur[m + 2] - rate[m] * cur[m] + cmul(c, x) +
                   cmul(c2, y);
        }
    }
}

Complex MeanFieldGenerator::expect_a(const BandData& rho) const {
    const Complex* b1 = rho.data() + layout_.index(1, 0);
    Complex sum = 0.0;
    for (int m = 0; m < layout_.band_length(1); ++m) sum += sqrt_[m + 1] * std::conj(b1[m]);
    return sum;
}

double MeanFieldGenerator::trace(const BandData& rho) const {
    const Complex* b0 = rho.data() + layout_.index(0, 0);
    double sum = 0.0;
    for (int m = 0; m < layout_.dim(); ++m) sum += b0[m].real();
    return sum;
}

double MeanFieldGenerator::boundary_occupation(const BandData& rho) const {
    return rho[layout_.index(0, layout_.nmax())].real();
}

bool MeanFieldGenerator::bounded(const BandData& rho) const {
    // |rho(m, n)| <= 1 for any state; also rejects NaN.
    for (const Complex& v : rho) {
        if (!(std::norm(v) <= 1.0 + 1e-6)) return false;
    }
    return true;
}

Rk4Stepper::Rk4Stepper(const MeanFieldGenerator& gen, double epsilon, bool per_stage)
    : gen_(gen),
      epsilon_(epsilon),
      per_stage_(per_stage),
      k1_(gen.layout().size()),
      k2_(gen.layout().size()),
      k3_(gen.layout().size()),
      k4_(gen.layout().size()),
      tmp_(gen.layout().size()) {}

Complex Rk4Stepper::step(BandData& y, double dt) {
    const std::size_t n = y.size();
    const Complex a0 = gen_.expect_a(y);
    auto field = [&](const BandData& state) {
        return epsilon_ * (per_stage_ ? gen_.expect_a(state) : a0);
    };
    const double h2 = 0.5 * dt;

    gen_.apply(y, epsilon_ * a0, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h2 * k1_[i];
    gen_.apply(tmp_, field(tmp_), k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h2 * k2_[i];
    gen_.apply(tmp_, field(tmp_), k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
    gen_.apply(tmp_, field(tmp_), k4_);
    const double h6 = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += h6 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
    }
    return a0;
}

}  // namespace qsync::detail

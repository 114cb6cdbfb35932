#pragma once

// Internal: Hermitian operators stored as their upper-triangle diagonals.
// Band k holds rho(m, m+k) for m = 0..nmax-k, padded with kPad zeros on both
// sides so the generator's shifted reads need no bounds checks.

#include <vector>

#include "qsync/fock.hpp"

namespace qsync::detail {

constexpr int kPad = 2;

class BandLayout {
public:
    explicit BandLayout(int nmax);

    int nmax() const noexcept { return nmax_; }
    int dim() const noexcept { return nmax_ + 1; }
    int band_length(int k) const noexcept { return dim() - k; }
    /// Index of element (m, m+k) in the flat array. Valid for k in [0, nmax+1].
    std::size_t index(int k, int m) const noexcept { return offset_[k] + kPad + m; }
    std::size_t size() const noexcept { return size_; }

private:
    int nmax_;
    std::vector<std::size_t> offset_;
    std::size_t size_;
};

using BandData = std::vector<Complex>;

BandData to_bands(const BandLayout& layout, const ComplexMatrix& m);
ComplexMatrix from_bands(const BandLayout& layout, const BandData& d);

/// Evaluates the mean-field generator in band form. Owns precomputed
/// coefficient tables; const methods are safe to share across threads.
class MeanFieldGenerator {
public:
    MeanFieldGenerator(int nmax, double kappa1, double kappa2);

    const BandLayout& layout() const noexcept { return layout_; }

    /// out = -i[H, rho] + L_d rho with H = eps (A a^dag + A^* a).
    void apply(const BandData& rho, Complex eps_times_a, BandData& out) const;

    /// Tr(a rho) = sum_m sqrt(m+1) conj(rho(m, m+1)).
    Complex expect_a(const BandData& rho) const;
    double trace(const BandData& rho) const;
    double boundary_occupation(const BandData& rho) const;
    /// False once any entry is non-finite or exceeds 1 in modulus.
    bool bounded(const BandData& rho) const;

private:
    BandLayout layout_;
    std::vector<double> sqrt_;
    std::vector<double> rate_;  // total outflow rate of element (m, n)
    std::vector<double> gain_;  // 2 k1 sqrt(m n), reads (m-1, n-1)
    std::vector<double> loss_;  // 2 k2 sqrt((m+1)(m+2)(n+1)(n+2)), reads (m+2, n+2)
};

/// Classical RK4 driver with reusable scratch buffers.
class Rk4Stepper {
public:
    Rk4Stepper(const MeanFieldGenerator& gen, double epsilon, bool per_stage);

    /// Advances y in place by dt. Returns the <a> used for the first stage.
    Complex step(BandData& y, double dt);

private:
    const MeanFieldGenerator& gen_;
    double epsilon_;
    bool per_stage_;
    BandData k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace qsync::detail

#pragma once

// Truncated number-basis states {|0>, ..., |nmax>} and the ladder-operator
// expectation values the rest of the library builds on.

#include <complex>

#include <Eigen/Dense>

namespace qsync {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Dense Hermitian, unit-trace operator on the truncated number basis.
/// Row and column index are photon numbers. Immutable once built.
class DensityMatrix {
public:
    /// Validates Hermiticity (anti-Hermitian part below `hermitian_tol`) and
    /// |Tr - 1| <= 1e-9, then stores the exactly Hermitian part (M + M^dag)/2.
    static DensityMatrix from_matrix(const ComplexMatrix& m, double hermitian_tol = 1e-10);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    int nmax() const noexcept { return dim() - 1; }
    Complex operator()(int row, int col) const { return m_(row, col); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    Complex trace() const { return m_.trace(); }

    /// Smallest eigenvalue; O(dim^3).
    double min_eigenvalue() const;

private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

/// Pure state amplitudes in the number basis.
struct FockVector {
    ComplexVector amplitudes;

    int dim() const noexcept { return static_cast<int>(amplitudes.size()); }
    double norm() const { return amplitudes.norm(); }
    DensityMatrix projector() const;
};

/// Result of building a coherent state: the renormalised projector plus the
/// Poisson weight that fell above the cutoff.
struct CoherentState {
    DensityMatrix rho;
    double lost_weight;
};

/// Smallest cutoff accepted for a coherent state: ceil(|alpha|^2 + 8|alpha| + 10).
int coherent_cutoff_rule(Complex alpha);

/// |alpha><alpha| truncated at nmax and renormalised to unit trace.
/// Throws Truncation when more than 1e-10 of the weight lies above nmax.
CoherentState coherent_state_with_loss(Complex alpha, int nmax);
DensityMatrix coherent_state(Complex alpha, int nmax);

/// |m><m|; Index error for m outside [0, nmax].
DensityMatrix number_state(int m, int nmax);

/// Tr(a rho) = sum_n sqrt(n+1) rho(n+1, n).
Complex expect_a(const DensityMatrix& rho);
/// Tr(a^dag a rho).
double expect_n(const DensityMatrix& rho);

/// Truncated lowering operator, a(n, n+1) = sqrt(n+1).
ComplexMatrix lowering_operator(int nmax);

}  // namespace qsync

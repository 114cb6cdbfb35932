#include "qsync/fock.hpp"

#include <cmath>
#include <sstream>

#include "qsync/error.hpp"

namespace qsync {

namespace {
constexpr double kTraceTol = 1e-9;
constexpr double kLostWeightTol = 1e-10;
}  // namespace

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m, double hermitian_tol) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw Error(ErrorKind::Index, "fock", "density matrix must be square and non-empty");
    }
    const double anti = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(anti <= hermitian_tol)) {
        std::ostringstream os;
        os << "density matrix not Hermitian: max |M - M^dag| = " << anti;
        throw Error(ErrorKind::Positivity, "fock", os.str());
    }
    ComplexMatrix herm = 0.5 * (m + m.adjoint());
    const double tr_err = std::abs(herm.trace() - Complex(1.0, 0.0));
    if (!(tr_err <= kTraceTol)) {
        std::ostringstream os;
        os << "density matrix trace differs from 1 by " << tr_err;
        throw Error(ErrorKind::Normalization, "fock", os.str());
    }
    return DensityMatrix(std::move(herm));
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

DensityMatrix FockVector::projector() const {
    const double nrm = norm();
    if (std::abs(nrm - 1.0) > 1e-12) {
        throw Error(ErrorKind::Normalization, "fock", "FockVector is not normalised");
    }
    return DensityMatrix::from_matrix(amplitudes * amplitudes.adjoint());
}

int coherent_cutoff_rule(Complex alpha) {
    const double mod = std::abs(alpha);
    return static_cast<int>(std::ceil(mod * mod + 8.0 * mod + 10.0));
}

CoherentState coherent_state_with_loss(Complex alpha, int nmax) {
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw Error(ErrorKind::InvalidConfig, "fock", "coherent amplitude must be finite");
    }
    if (nmax < 0) {
        throw Error(ErrorKind::Index, "fock", "nmax must be non-negative");
    }
    // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built by the ratio recursion
    // c_{n+1} = c_n alpha / sqrt(n+1).
    ComplexVector amp(nmax + 1);
    amp(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < nmax; ++n) {
        amp(n + 1) = amp(n) * alpha / std::sqrt(static_cast<double>(n + 1));
    }
    const double kept = amp.squaredNorm();
    const double lost = std::max(0.0, 1.0 - kept);
    if (lost > kLostWeightTol) {
        std::ostringstream os;
        os << "nmax=" << nmax << " too small for coherent amplitude |alpha|=" << std::abs(alpha)
           << " (lost weight " << lost << ", need nmax >= " << coherent_cutoff_rule(alpha) << ")";
        throw Error(ErrorKind::Truncation, "fock", os.str());
    }
    amp /= std::sqrt(kept);
    return {FockVector{amp}.projector(), lost};
}

DensityMatrix coherent_state(Complex alpha, int nmax) {
    return coherent_state_with_loss(alpha, nmax).rho;
}

DensityMatrix number_state(int m, int nmax) {
    if (nmax < 0 || m < 0 || m > nmax) {
        std::ostringstream os;
        os << "number state m=" << m << " outside [0, " << nmax << "]";
        throw Error(ErrorKind::Index, "fock", os.str());
    }
    ComplexMatrix rho = ComplexMatrix::Zero(nmax + 1, nmax + 1);
    rho(m, m) = 1.0;
    return DensityMatrix::from_matrix(rho);
}

Complex expect_a(const DensityMatrix& rho) {
    Complex sum = 0.0;
    for (int n = 0; n + 1 < rho.dim(); ++n) {
        sum += std::sqrt(static_cast<double>(n + 1)) * rho(n + 1, n);
    }
    return sum;
}

double expect_n(const DensityMatrix& rho) {
    double sum = 0.0;
    for (int n = 1; n < rho.dim(); ++n) {
        sum += n * rho(n, n).real();
    }
    return sum;
}

ComplexMatrix lowering_operator(int nmax) {
    ComplexMatrix a = ComplexMatrix::Zero(nmax + 1, nmax + 1);
    for (int n = 0; n < nmax; ++n) {
        a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
    }
    return a;
}

}  // namespace qsync

#include "qsync/observables.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qsync/error.hpp"

namespace qsync {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegativeDiagonalTol = 1e-8;
constexpr double kClampTol = 1e-10;

double clamped(double p) {
    if (p < -kClampTol) {
        std::ostringstream os;
        os << "probability " << p << " below clamping tolerance";
        throw Error(ErrorKind::Positivity, "observables", os.str());
    }
    return p < 0.0 ? 0.0 : p;
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

double PhaseDistribution::spacing() const {
    return 2.0 * kPi / static_cast<double>(values.size());
}

double WignerGrid::integral() const {
    auto weights = [](const std::vector<double>& axis) {
        std::vector<double> w(axis.size(), 0.0);
        for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
            const double h = 0.5 * (axis[i + 1] - axis[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        return w;
    };
    const auto wx = weights(x_axis);
    const auto wp = weights(p_axis);
    double sum = 0.0;
    for (std::size_t i = 0; i < x_axis.size(); ++i) {
        for (std::size_t j = 0; j < p_axis.size(); ++j) sum += wx[i] * wp[j] * values(i, j);
    }
    return sum;
}

NumberDistribution number_distribution(const DensityMatrix& rho) {
    NumberDistribution dist;
    dist.p.resize(rho.dim());
    for (int n = 0; n < rho.dim(); ++n) {
        const Complex v = rho(n, n);
        if (std::abs(v.imag()) >= 1e-12) {
            throw Error(ErrorKind::Positivity, "observables", "diagonal element has imaginary part");
        }
        if (v.real() < -kNegativeDiagonalTol) {
            std::ostringstream os;
            os << "P(" << n << ") = " << v.real() << " is negative";
            throw Error(ErrorKind::Positivity, "observables", os.str());
        }
        dist.p[n] = v.real();
    }
    return dist;
}

int most_probable_n(const NumberDistribution& dist) {
    int best = 0;
    for (int n = 1; n < static_cast<int>(dist.p.size()); ++n) {
        if (dist.p[n] > dist.p[best]) best = n;
    }
    return best;
}

int default_phase_grid_size(int nmax) { return std::max(1024, 8 * (nmax + 1)); }

PhaseDistribution phase_distribution(const DensityMatrix& rho, int grid_size) {
    const int nmax = rho.nmax();
    if (grid_size < 2 * nmax + 1) {
        std::ostringstream os;
        os << "phase grid of " << grid_size << " points aliases a cutoff of nmax=" << nmax
           << " (need >= " << 2 * nmax + 1 << ")";
        throw Error(ErrorKind::Aliasing, "observables", os.str());
    }
    // P(phi) = (1/2pi) [Tr rho + 2 Re sum_{k>=1} s_k e^{ik phi}],  s_k = sum_m rho(m, m+k).
    std::vector<Complex> s(nmax + 1, 0.0);
    for (int k = 0; k <= nmax; ++k) {
        for (int m = 0; m + k <= nmax; ++m) s[k] += rho(m, m + k);
    }
    // On phi_j = -pi + 2 pi j / M, e^{ik phi_j} = (-1)^k w^{kj} with w = e^{2 pi i / M}.
    std::vector<Complex> roots(grid_size);
    for (int q = 0; q < grid_size; ++q) roots[q] = std::polar(1.0, 2.0 * kPi * q / grid_size);

    PhaseDistribution dist;
    dist.grid.resize(grid_size);
    dist.values.resize(grid_size);
    for (int j = 0; j < grid_size; ++j) {
        dist.grid[j] = -kPi + 2.0 * kPi * j / grid_size;
        Complex acc = 0.0;
        for (int k = 1; k <= nmax; ++k) {
            const Complex term = s[k] * roots[(static_cast<long>(k) * j) % grid_size];
            acc += (k % 2 == 0) ? term : -term;
        }
        dist.values[j] = (s[0].real() + 2.0 * acc.real()) / (2.0 * kPi);
    }
    return dist;
}

double entropic_phase_uncertainty(const PhaseDistribution& dist) {
    double sum = 0.0;
    for (double v : dist.values) sum += xlogx(clamped(v));
    return -sum * dist.spacing();
}

double entropic_number_uncertainty(const NumberDistribution& dist) {
    double sum = 0.0;
    for (double v : dist.p) sum += xlogx(clamped(v));
    return -sum;
}

double wigner_extent(int nmax) { return std::sqrt(2.0 * nmax) + 3.0; }

std::vector<double> symmetric_axis(double half_width, int points) {
    std::vector<double> axis(points);
    for (int i = 0; i < points; ++i) {
        axis[i] = points == 1 ? 0.0 : -half_width + 2.0 * half_width * i / (points - 1);
    }
    return axis;
}

namespace {

// W(beta) = (1/pi) sum_{m,n} rho(m,n) (-1)^m <n|D(2 beta)|m> with beta = (x+ip)/sqrt(2).
// The normalised associated-Laguerre functions
//   L[m][n] = (1/pi) e^{-2|beta|^2} (-1)^m sqrt(m!/n!) (2 beta)^{n-m} L_m^{(n-m)}(4|beta|^2)
// are generated row by row with their three-term recurrence, which stays
// finite where the explicit polynomial would overflow.
class WignerKernel {
public:
    explicit WignerKernel(const DensityMatrix& rho) : m_(rho.matrix()), row_(rho.dim()), sq_(rho.dim() + 1) {
        for (int j = 0; j <= rho.dim(); ++j) sq_[j] = std::sqrt(static_cast<double>(j));
    }

    double operator()(double x, double p) {
        const int dim = static_cast<int>(m_.rows());
        const Complex two_beta = 2.0 * Complex(x, p) / std::numbers::sqrt2;
        const Complex two_beta_c = std::conj(two_beta);
        row_[0] = std::exp(-0.5 * std::norm(two_beta)) / kPi;
        double w = m_(0, 0).real() * row_[0].real();
        for (int n = 1; n < dim; ++n) {
            row_[n] = two_beta * row_[n - 1] / sq_[n];
            w += 2.0 * (m_(0, n) * row_[n]).real();
        }
        for (int mm = 1; mm < dim; ++mm) {
            Complex prev = row_[mm];
            row_[mm] = (two_beta_c * prev - sq_[mm] * row_[mm - 1]) / sq_[mm];
            w += (m_(mm, mm) * row_[mm]).real();
            for (int n = mm + 1; n < dim; ++n) {
                const Complex next = (two_beta * row_[n - 1] - sq_[mm] * prev) / sq_[n];
                prev = row_[n];
                row_[n] = next;
                w += 2.0 * (m_(mm, n) * row_[n]).real();
            }
        }
        return w;
    }

private:
    const ComplexMatrix& m_;
    std::vector<Complex> row_;
    std::vector<double> sq_;
};

}  // namespace

double wigner_value(const DensityMatrix& rho, double x, double p) {
    return WignerKernel(rho)(x, p);
}

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis) {
    WignerGrid grid{x_axis, p_axis, Eigen::MatrixXd(x_axis.size(), p_axis.size())};
    WignerKernel kernel(rho);
    for (std::size_t ix = 0; ix < x_axis.size(); ++ix) {
        for (std::size_t ip = 0; ip < p_axis.size(); ++ip) grid.values(ix, ip) = kernel(x_axis[ix], p_axis[ip]);
    }

    const double extent = wigner_extent(rho.nmax());
    auto covers = [extent](const std::vector<double>& axis) {
        return !axis.empty() && axis.front() <= -extent && axis.back() >= extent;
    };
    if (!covers(x_axis) || !covers(p_axis)) {
        const double integral = grid.integral();
        if (std::abs(integral - 1.0) > 1e-6) {
            std::ostringstream os;
            os << "Wigner grid does not cover +/-" << extent << "; integral = " << integral;
            throw Error(ErrorKind::Normalization, "observables", os.str());
        }
    }
    return grid;
}

}  // namespace qsync

#pragma once

// Number and phase statistics of a state, entropic uncertainties, and the
// Wigner function.

#include <vector>

#include "qsync/fock.hpp"

namespace qsync {

struct NumberDistribution {
    std::vector<double> p;  // p[n] = <n|rho|n>
};

/// Susskind-Glogower phase density sampled on phi_k = -pi + 2 pi k / M.
struct PhaseDistribution {
    std::vector<double> grid;
    std::vector<double> values;  // 1/radian
    double spacing() const;
};

/// Quadratures with a = (x + i p)/sqrt(2); values(i, j) = W(x_i, p_j).
struct WignerGrid {
    std::vector<double> x_axis;
    std::vector<double> p_axis;
    Eigen::MatrixXd values;
    /// Trapezoid-rule integral over the grid.
    double integral() const;
};

NumberDistribution number_distribution(const DensityMatrix& rho);

/// argmax p(n), ties resolved toward the smaller n.
int most_probable_n(const NumberDistribution& dist);

/// max(1024, 8 (nmax+1)).
int default_phase_grid_size(int nmax);

/// P(phi) = (1/2pi) sum_{m,n} rho(m,n) e^{i(n-m)phi}. Aliasing error if M < 2 nmax + 1.
PhaseDistribution phase_distribution(const DensityMatrix& rho, int grid_size);

/// -integral P ln P dphi (rectangle rule), in nats.
double entropic_phase_uncertainty(const PhaseDistribution& dist);

/// -sum p ln p, in nats.
double entropic_number_uncertainty(const NumberDistribution& dist);

/// Normalised so the integral over (x, p) is 1; vacuum peaks at 1/pi.
WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis);

/// W at a single phase-space point, without the grid coverage check.
double wigner_value(const DensityMatrix& rho, double x, double p);

/// Uniform axis of `points` samples on [-half_width, half_width].
std::vector<double> symmetric_axis(double half_width, int points);

/// Half-width that contains a state on the cutoff: sqrt(2 nmax) + 3.
double wigner_extent(int nmax);

}  // namespace qsync

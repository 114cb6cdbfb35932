#pragma once

// Classical gradient-flow model of the order parameter,
//   dr/dt = -V'(r),  V(r) = r^2/(8 eps) - f r^3/3 + g r^4/4,
// whose saddle-node bifurcation at eps_c = g/f^2 gives the (1 - eps/eps_c)^(-1/2)
// bottleneck scaling used as the reference for the quantum relaxation times.

#include <vector>

namespace qsync::classical {

struct PotentialParams {
    double epsilon = 1.0;
    double f = 1.0;
    double g = 1.0;
    /// InvalidConfig unless all three are strictly positive and finite.
    void validate() const;
};

enum class Stability { Stable, Unstable };

struct FixedPoint {
    double r = 0.0;
    Stability stability = Stability::Stable;
};

/// Sorted ascending in r; r = 0 always first and stable. At the saddle-node
/// point the double root appears once, marked unstable (V'' = 0, semi-stable).
struct FixedPointSet {
    std::vector<FixedPoint> points;
};

double potential(double r, const PotentialParams& params);
double potential_derivative(double r, const PotentialParams& params);
double potential_curvature(double r, const PotentialParams& params);

FixedPointSet fixed_points(const PotentialParams& params);

/// g / f^2.
double classical_critical_coupling(double f, double g);

struct OrderParameterSeries {
    std::vector<double> times;
    std::vector<double> r;
};

/// RK4 on dr/dt = -V'(r), sampled every `record_stride` steps (and at the end).
OrderParameterSeries integrate_order_parameter(double r0, const PotentialParams& params, double dt,
                                               double t_max, int record_stride = 1);

/// Time for r to fall below threshold, interpolated at step resolution.
/// NoCrossing error if it does not happen before t_max.
double bottleneck_time(const PotentialParams& params, double r0, double threshold, double dt = 1e-4,
                       double t_max = 1e6);

/// Initial value separating decay to 0 from capture by the outer minimum,
/// found by bisection on r0 in [lo, hi].
double basin_boundary(const PotentialParams& params, double lo, double hi, double tol = 1e-10,
                      double dt = 1e-3);

/// Least-squares (f, g) reproducing a quantum critical coupling and a set of
/// synchronised amplitudes r_i observed at couplings eps_i > eps_c, with
/// g = eps_c f^2 imposed exactly.
struct FGMapping {
    double f = 0.0;
    double g = 0.0;
    double residual = 0.0;
};
FGMapping map_quantum_to_potential(double epsilon_c, const std::vector<double>& couplings,
                                   const std::vector<double>& stable_r);

}  // namespace qsync::classical

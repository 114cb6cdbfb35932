#pragma once

// Locating the synchronisation transition: relaxation times, bisection for
// the critical coupling and the separatrix, and the critical-scaling fit
// t = A (1 - eps/eps_c)^b.

#include <functional>
#include <vector>

#include "qsync/dynamics.hpp"

namespace qsync {

struct RelaxationPoint {
    double epsilon = 0.0;
    double t_relax = 0.0;
};

struct ScalingFit {
    double epsilon_c = 0.0;
    double exponent_b = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;  // sum of squared log-space errors
    std::vector<double> couplings_used;
};

/// Integration horizon that doubles while the verdict stays undecided.
struct Horizon {
    double t_initial = 500.0;
    double t_cap = 1048576.0;  // 2^20 / kappa1
};

/// Relaxation threshold used throughout (r = |<a>| below 0.005).
inline constexpr double kDefaultRelaxThreshold = 0.005;

/// First time r(t) < threshold, linearly interpolated between record points.
/// NoCrossing error unless the trajectory is unsynchronised and crosses.
double relaxation_time(const Trajectory& traj, double threshold = kDefaultRelaxThreshold);

/// Integrates `config`, extending the run (continuing from its final state)
/// with doubled total time while the verdict is undecided. Inconclusive
/// error once the total would exceed the horizon cap. Times in the returned
/// trajectory are absolute.
Trajectory integrate_to_verdict(const SimConfig& config, const Horizon& horizon);

/// Receives every completed trajectory of a search or sweep, with the config
/// that produced it. Sweeps call it from one thread at a time.
using TrajectorySink = std::function<void(const SimConfig&, const Trajectory&)>;

struct BisectionStep {
    double value = 0.0;
    Verdict verdict = Verdict::Undecided;
    double t_used = 0.0;
};

struct CriticalCoupling {
    double epsilon_c = 0.0;
    double lo = 0.0;  // unsynchronised
    double hi = 0.0;  // synchronised
    std::vector<BisectionStep> history;
};

/// Bisection on the integrate verdict over epsilon in [eps_lo, eps_hi].
/// `base` supplies R, alpha_init and numerics. NoBracket error when eps_lo
/// does not relax or eps_hi does not synchronise.
CriticalCoupling find_critical_coupling(const SimConfig& base, double eps_lo, double eps_hi,
                                        double tol, const Horizon& horizon = {},
                                        const TrajectorySink& sink = {});

struct Separatrix {
    double alpha_crit = 0.0;
    double lo = 0.0;  // unsynchronised
    double hi = 0.0;  // synchronised
    std::vector<BisectionStep> history;
};

/// Bisection on real alpha_init in [alpha_lo, alpha_hi] at fixed epsilon.
/// NoSeparatrix error when even alpha_hi relaxes (epsilon below eps_c).
Separatrix find_separatrix_alpha(const SimConfig& base, double alpha_lo, double alpha_hi,
                                 double tol, const Horizon& horizon = {}, const TrajectorySink& sink = {});

/// Relaxation time at each coupling (input order preserved); trajectories run
/// concurrently up to `jobs`. Synchronised points carry t_relax = NaN.
struct SweepPoint {
    double epsilon = 0.0;
    double t_relax = 0.0;
    Verdict verdict = Verdict::Undecided;
};
std::vector<SweepPoint> relaxation_sweep(const SimConfig& base, const std::vector<double>& couplings,
                                         double threshold, const Horizon& horizon, int jobs = 1,
                                         const TrajectorySink& sink = {});

/// Keeps points whose relaxation time is at least the weak-coupling baseline.
std::vector<RelaxationPoint> filter_scaling_points(const std::vector<RelaxationPoint>& points,
                                                   double baseline_t);

/// Least-squares line of ln t against ln(1 - eps/eps_c) for each candidate;
/// returns the candidate with the smallest residual. An empty grid selects
/// the automatic geometric grid with zoom passes down to 1e-7 resolution,
/// followed by a Brent polish inside the final bracket.
ScalingFit fit_critical_scaling(const std::vector<RelaxationPoint>& points,
                                const std::vector<double>& eps_c_grid = {});

/// Line fit at a fixed eps_c (no search).
ScalingFit fit_at_critical_coupling(const std::vector<RelaxationPoint>& points, double epsilon_c);

/// Widest relative coupling range 1 - eps_min/eps_c over which a power-law
/// fit to the points nearest criticality keeps its RMS log residual per
/// point below `tol`. Uses at least 5 points.
double scaling_range_breadth(const std::vector<RelaxationPoint>& points, double tol = 0.01);

}  // namespace qsync

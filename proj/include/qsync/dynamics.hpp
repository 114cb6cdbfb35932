#pragma once

// Self-consistent mean-field master equation for an all-to-all coupled
// ensemble of quantum van der Pol oscillators, and its RK4 integration.
//
//   drho/dt = -i[H_mf, rho] + L_d rho,   H_mf = eps (<a> a^dag + <a^dag> a)
//   L_d rho = k1 (2 a^dag rho a - a a^dag rho - rho a a^dag)
//           + k2 (2 a^2 rho a^dag^2 - a^dag^2 a^2 rho - rho a^dag^2 a^2)
//
// Operators are the truncated matrices on {|0>..|nmax>}, so L_d is exactly
// trace preserving; probability piling up at |nmax> is monitored instead.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsync/fock.hpp"

namespace qsync {

enum class Verdict { Synchronised, Unsynchronised, Undecided };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// How <a> enters the Runge-Kutta stages.
enum class CouplingUpdate {
    PerStage,  // recomputed from every stage state (autonomous nonlinear ODE)
    PerStep,   // frozen at the value of the state at the start of the step
};

struct SimConfig {
    double kappa1 = 1.0;
    double R = 0.04;  // kappa2 / kappa1
    double epsilon = 0.0;
    Complex alpha_init{2.75, 0.0};
    int nmax = 0;  // 0 selects choose_nmax(R, alpha_init)
    double dt = 1e-3;
    double t_max = 1000.0;
    int record_stride = 500;
    double r_threshold = 0.005;
    double sync_window = 50.0;
    double sync_tolerance = 1e-6;
    CouplingUpdate coupling_update = CouplingUpdate::PerStage;
    double boundary_warn = 1e-8;
    double boundary_fail = 1e-6;
    /// Evaluate the minimum eigenvalue of rho at record points.
    bool check_positivity = true;
    /// Stop as soon as a verdict fires; otherwise run to t_max.
    bool stop_on_verdict = true;

    double kappa2() const { return R * kappa1; }
    /// Throws InvalidConfig naming the offending field.
    void validate() const;
    /// nmax, or choose_nmax when nmax == 0.
    int resolved_nmax() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Complex> a_expect;
    std::vector<double> r;
    std::vector<double> n_expect;
    std::vector<int> n_mp;
    std::vector<double> delta_n;
    std::vector<double> delta_phi;
    std::vector<double> trace_error;
    std::vector<double> min_eigenvalue;  // NaN when positivity checks are off
    std::optional<DensityMatrix> final_state;
    Verdict verdict = Verdict::Undecided;
    int nmax = 0;
    double dt = 0.0;
    double max_boundary_occupation = 0.0;
    bool truncation_warning = false;
    long steps = 0;

    std::size_t size() const { return times.size(); }
};

/// Called at every record point with the recorded time and state.
using StateObserver = std::function<void(double t, const DensityMatrix& rho)>;

/// L_d rho on the truncated basis.
ComplexMatrix dissipator(const DensityMatrix& rho, double kappa1, double kappa2);

/// -i[H_mf(rho), rho] + L_d rho, with <a> taken from the same rho.
ComplexMatrix mean_field_rhs(const DensityMatrix& rho, const SimConfig& config);

/// One classical RK4 step of size config.dt. Divergence error on NaN/Inf.
DensityMatrix rk4_step(const DensityMatrix& rho, const SimConfig& config);

/// Integrates from coherent_state(alpha_init, nmax) until a verdict fires or
/// t_max is reached.
Trajectory integrate(const SimConfig& config, const StateObserver& observer = {});

/// Same as integrate, but from an explicit initial state (its dimension fixes nmax).
Trajectory integrate_from(const DensityMatrix& initial, const SimConfig& config,
                          const StateObserver& observer = {});

/// Null vector of the closed diagonal rate equations of the uncoupled
/// oscillator, normalised to unit sum. Cutoff error if P(nmax) >= 1e-12.
std::vector<double> exact_unsynchronised_steady_state(double R, int nmax);

/// Cutoff large enough for both the initial coherent state and the
/// unsynchronised steady state, with 50% headroom on the latter.
int choose_nmax(double R, Complex alpha_init);

}  // namespace qsync

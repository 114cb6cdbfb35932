#include "qsync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#if defined(__SSE2__)
#include <immintrin.h>
#endif

#include "band_kernel.hpp"
#include "qsync/error.hpp"
#include "qsync/observables.hpp"

namespace qsync {

namespace {

constexpr double kTailTol = 1e-12;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidConfig, "dynamics", "invalid " + field + ": " + why);
}

// Sliding max/min over the trailing window of r samples.
class WindowSpread {
public:
    void push(long step, double v) {
        while (!max_.empty() && max_.back().second <= v) max_.pop_back();
        max_.emplace_back(step, v);
        while (!min_.empty() && min_.back().second >= v) min_.pop_back();
        min_.emplace_back(step, v);
    }
    void expire_before(long step) {
        while (!max_.empty() && max_.front().first < step) max_.pop_front();
        while (!min_.empty() && min_.front().first < step) min_.pop_front();
    }
    double spread() const { return max_.front().second - min_.front().second; }

private:
    std::deque<std::pair<long, double>> max_, min_;
};

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Synchronised: return "synchronised";
        case Verdict::Unsynchronised: return "unsynchronised";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "synchronised") return Verdict::Synchronised;
    if (s == "unsynchronised") return Verdict::Unsynchronised;
    if (s == "undecided") return Verdict::Undecided;
    throw Error(ErrorKind::InvalidConfig, "dynamics", "unknown verdict '" + s + "'");
}

void SimConfig::validate() const {
    if (!(kappa1 > 0.0) || !std::isfinite(kappa1)) invalid("kappa1", "must be > 0");
    if (!(R > 0.0) || !std::isfinite(R)) invalid("R", "must be > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) invalid("epsilon", "must be >= 0");
    if (!std::isfinite(alpha_init.real()) || !std::isfinite(alpha_init.imag())) {
        invalid("alpha", "must be finite");
    }
    if (nmax != 0 && nmax < 2) invalid("nmax", "must be >= 2 (or 0 for automatic)");
    if (!(dt > 0.0) || !std::isfinite(dt)) invalid("dt", "must be > 0");
    if (!(t_max > dt)) invalid("tmax", "must exceed dt");
    if (record_stride < 1) invalid("record_stride", "must be >= 1");
    if (!(r_threshold > 0.0 && r_threshold < 1.0)) invalid("threshold", "must lie in (0, 1)");
    if (!(sync_window > 0.0)) invalid("sync_window", "must be > 0");
    if (!(sync_tolerance > 0.0)) invalid("sync_tolerance", "must be > 0");
    if (!(boundary_warn > 0.0 && boundary_fail >= boundary_warn)) {
        invalid("boundary_fail", "need 0 < boundary_warn <= boundary_fail");
    }
}

int SimConfig::resolved_nmax() const {
    return nmax > 0 ? nmax : choose_nmax(R, alpha_init);
}

ComplexMatrix dissipator(const DensityMatrix& rho, double kappa1, double kappa2) {
    if (kappa1 < 0.0 || kappa2 < 0.0) {
        throw Error(ErrorKind::InvalidConfig, "dynamics", "dissipation rates must be >= 0");
    }
    detail::MeanFieldGenerator gen(rho.nmax(), kappa1, kappa2);
    const auto y = detail::to_bands(gen.layout(), rho.matrix());
    detail::BandData out(y.size());
    gen.apply(y, Complex(0.0, 0.0), out);
    return detail::from_bands(gen.layout(), out);
}

ComplexMatrix mean_field_rhs(const DensityMatrix& rho, const SimConfig& config) {
    detail::MeanFieldGenerator gen(rho.nmax(), config.kappa1, config.kappa2());
    const auto y = detail::to_bands(gen.layout(), rho.matrix());
    detail::BandData out(y.size());
    gen.apply(y, config.epsilon * gen.expect_a(y), out);
    return detail::from_bands(gen.layout(), out);
}

DensityMatrix rk4_step(const DensityMatrix& rho, const SimConfig& config) {
    detail::MeanFieldGenerator gen(rho.nmax(), config.kappa1, config.kappa2());
    auto y = detail::to_bands(gen.layout(), rho.matrix());
    detail::Rk4Stepper stepper(gen, config.epsilon,
                               config.coupling_update == CouplingUpdate::PerStage);
    stepper.step(y, config.dt);
    if (!gen.bounded(y)) {
        std::ostringstream os;
        os << "state blew up in one RK4 step with dt=" << config.dt;
        throw Error(ErrorKind::Divergence, "dynamics", os.str());
    }
    return DensityMatrix::from_matrix(detail::from_bands(gen.layout(), y));
}

Trajectory integrate(const SimConfig& config, const StateObserver& observer) {
    config.validate();
    return integrate_from(coherent_state(config.alpha_init, config.resolved_nmax()), config,
                          observer);
}

namespace {

// Decaying coherences underflow into subnormals at weak coupling, where each
// arithmetic op costs ~100 cycles. Flush them to zero for the whole run.
class FlushSubnormals {
public:
#if defined(__SSE2__)
    FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
    ~FlushSubnormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

}  // namespace

Trajectory integrate_from(const DensityMatrix& initial, const SimConfig& config,
                          const StateObserver& observer) {
    config.validate();
    const FlushSubnormals ftz;
    const int nmax = initial.nmax();
    detail::MeanFieldGenerator gen(nmax, config.kappa1, config.kappa2());
    detail::Rk4Stepper stepper(gen, config.epsilon,
                               config.coupling_update == CouplingUpdate::PerStage);
    auto y = detail::to_bands(gen.layout(), initial.matrix());

    Trajectory traj;
    traj.nmax = nmax;
    traj.dt = config.dt;

    const int phase_points = default_phase_grid_size(nmax);
    auto record = [&](long step, const detail::BandData& state) {
        const double t = static_cast<double>(step) * config.dt;
        if (!gen.bounded(state)) {
            std::ostringstream os;
            os << "state blew up by step " << step << " (t=" << t << ", dt=" << config.dt << ")";
            throw Error(ErrorKind::Divergence, "dynamics", os.str());
        }
        const auto rho = DensityMatrix::from_matrix(detail::from_bands(gen.layout(), state), 1e-12);
        const double p_top = gen.boundary_occupation(state);
        traj.max_boundary_occupation = std::max(traj.max_boundary_occupation, p_top);
        if (p_top > config.boundary_fail) {
            std::ostringstream os;
            os << "occupation of |nmax=" << nmax << "> reached " << p_top << " at t=" << t
               << "; increase nmax";
            throw Error(ErrorKind::Truncation, "dynamics", os.str());
        }
        if (p_top > config.boundary_warn) traj.truncation_warning = true;

        const Complex a = expect_a(rho);
        const auto pn = number_distribution(rho);
        const auto pphi = phase_distribution(rho, phase_points);
        traj.times.push_back(t);
        traj.a_expect.push_back(a);
        traj.r.push_back(std::abs(a));
        traj.n_expect.push_back(expect_n(rho));
        traj.n_mp.push_back(most_probable_n(pn));
        traj.delta_n.push_back(entropic_number_uncertainty(pn));
        traj.delta_phi.push_back(entropic_phase_uncertainty(pphi));
        traj.trace_error.push_back(std::abs(gen.trace(state) - 1.0));
        traj.min_eigenvalue.push_back(config.check_positivity
                                          ? rho.min_eigenvalue()
                                          : std::numeric_limits<double>::quiet_NaN());
        if (observer) observer(t, rho);
    };

    const long max_steps = static_cast<long>(std::ceil(config.t_max / config.dt - 1e-9));
    const long window_steps = static_cast<long>(std::llround(config.sync_window / config.dt));
    WindowSpread spread;
    long last_recorded = 0;
    record(0, y);
    spread.push(0, traj.r.back());

    detail::BandData previous;
    long step = 0;
    while (step < max_steps) {
        previous = y;
        stepper.step(y, config.dt);
        ++step;
        const Complex a = gen.expect_a(y);
        const double r = std::abs(a);
        if (!std::isfinite(r) || !std::isfinite(gen.trace(y))) {
            std::ostringstream os;
            os << "non-finite state at step " << step << " (t=" << step * config.dt
               << ", dt=" << config.dt << ")";
            throw Error(ErrorKind::Divergence, "dynamics", os.str());
        }

        if (r < config.r_threshold && traj.verdict == Verdict::Undecided) {
            traj.verdict = Verdict::Unsynchronised;
            if (config.stop_on_verdict) {
                // Keep the bracketing pair so the crossing can be interpolated at step resolution.
                if (last_recorded != step - 1) record(step - 1, previous);
                record(step, y);
                last_recorded = step;
                break;
            }
        }

        spread.push(step, r);
        spread.expire_before(step - window_steps);
        if (traj.verdict == Verdict::Undecided && step >= window_steps &&
            r > config.r_threshold && spread.spread() < config.sync_tolerance) {
            traj.verdict = Verdict::Synchronised;
            if (config.stop_on_verdict) {
                record(step, y);
                last_recorded = step;
                break;
            }
        }

        if (step % config.record_stride == 0 || step == max_steps) {
            record(step, y);
            last_recorded = step;
        }
    }
    traj.steps = step;
    traj.final_state = DensityMatrix::from_matrix(detail::from_bands(gen.layout(), y), 1e-12);
    return traj;
}

std::vector<double> exact_unsynchronised_steady_state(double R, int nmax) {
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidConfig, "dynamics", "R must be > 0");
    if (nmax < 1) throw Error(ErrorKind::Index, "dynamics", "nmax must be >= 1");
    const int dim = nmax + 1;
    const double k1 = 1.0;
    const double k2 = R;
    // dP/dt = Q P with the same truncation as the operator form: no gain out of |nmax>.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        if (n < nmax) {
            q(n, n) -= 2.0 * k1 * (n + 1);
            q(n + 1, n) += 2.0 * k1 * (n + 1);
        }
        if (n >= 2) {
            const double rate = 2.0 * k2 * n * (n - 1.0);
            q(n, n) -= rate;
            q(n - 2, n) += rate;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(q);
    lu.setThreshold(1e-13);
    if (lu.dimensionOfKernel() != 1) {
        std::ostringstream os;
        os << "rate matrix null space has dimension " << lu.dimensionOfKernel();
        throw Error(ErrorKind::Degenerate, "dynamics", os.str());
    }
    // Replace the first balance equation by the normalisation constraint.
    Eigen::MatrixXd sys = q;
    sys.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs(0) = 1.0;
    Eigen::VectorXd p = sys.fullPivLu().solve(rhs);
    for (int n = 0; n < dim; ++n) p(n) = std::max(p(n), 0.0);
    p /= p.sum();
    if (p(nmax) >= kTailTol) {
        std::ostringstream os;
        os << "steady-state weight " << p(nmax) << " at nmax=" << nmax << " for R=" << R;
        throw Error(ErrorKind::Cutoff, "dynamics", os.str());
    }
    return {p.data(), p.data() + dim};
}

int choose_nmax(double R, Complex alpha_init) {
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidConfig, "dynamics", "R must be > 0");
    int big = static_cast<int>(std::ceil(4.0 / R)) + 40;
    std::vector<double> p;
    for (;;) {
        try {
            p = exact_unsynchronised_steady_state(R, big);
            break;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Cutoff) throw;
            big *= 2;
        }
    }
    double tail = 0.0;
    int n_tail = static_cast<int>(p.size()) - 1;
    for (int n = static_cast<int>(p.size()) - 1; n >= 0; --n) {
        // tail = sum_{m > n} P(m)
        if (tail >= kTailTol) break;
        n_tail = n;
        tail += p[n];
    }
    const int oracle_rule = static_cast<int>(std::ceil(1.5 * n_tail));
    return std::max(coherent_cutoff_rule(alpha_init), oracle_rule);
}

}  // namespace qsync

#include "qsync/transition.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "qsync/error.hpp"
#include "qsync/parallel.hpp"

namespace qsync {

namespace {

constexpr int kMinFitPoints = 5;
constexpr double kGridResolution = 1e-7;

void append(Trajectory& into, const Trajectory& more, double t_offset) {
    // The first record of the continuation duplicates the last record of `into`.
    for (std::size_t i = 1; i < more.size(); ++i) {
        into.times.push_back(more.times[i] + t_offset);
        into.a_expect.push_back(more.a_expect[i]);
        into.r.push_back(more.r[i]);
        into.n_expect.push_back(more.n_expect[i]);
        into.n_mp.push_back(more.n_mp[i]);
        into.delta_n.push_back(more.delta_n[i]);
        into.delta_phi.push_back(more.delta_phi[i]);
        into.trace_error.push_back(more.trace_error[i]);
        into.min_eigenvalue.push_back(more.min_eigenvalue[i]);
    }
    into.final_state = more.final_state;
    into.verdict = more.verdict;
    into.steps += more.steps;
    into.max_boundary_occupation = std::max(into.max_boundary_occupation, more.max_boundary_occupation);
    into.truncation_warning = into.truncation_warning || more.truncation_warning;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        scale = std::max(scale, std::abs(x[i]));
    }
    if (!(sxx > n * std::pow(1e-12 * scale, 2))) {
        throw Error(ErrorKind::Degenerate, "transition", "scaling fit abscissas are degenerate");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        fit.residual += e * e;
    }
    return fit;
}

double max_epsilon(const std::vector<RelaxationPoint>& points) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::max(m, p.epsilon);
    return m;
}

void check_points(const std::vector<RelaxationPoint>& points) {
    if (static_cast<int>(points.size()) < kMinFitPoints) {
        std::ostringstream os;
        os << "scaling fit needs at least " << kMinFitPoints << " points, got " << points.size();
        throw Error(ErrorKind::Degenerate, "transition", os.str());
    }
    for (const auto& p : points) {
        if (!(p.t_relax > 0.0) || !std::isfinite(p.t_relax)) {
            throw Error(ErrorKind::InvalidConfig, "transition", "relaxation times must be finite and > 0");
        }
    }
}

Verdict verdict_at(const SimConfig& base, const Horizon& horizon, BisectionStep& step, const TrajectorySink& sink) {
    const Trajectory traj = integrate_to_verdict(base, horizon);
    if (sink) sink(base, traj);
    step.verdict = traj.verdict;
    step.t_used = traj.times.back();
    return traj.verdict;
}

}  // namespace

double relaxation_time(const Trajectory& traj, double threshold) {
    if (traj.verdict != Verdict::Unsynchronised) {
        throw Error(ErrorKind::NoCrossing, "transition",
                    "trajectory verdict is " + to_string(traj.verdict) + ", no relaxation time");
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.r[i] < threshold) {
            if (i == 0) return traj.times[0];
            const double r0 = traj.r[i - 1];
            const double r1 = traj.r[i];
            const double frac = (r0 - threshold) / (r0 - r1);
            return traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]);
        }
    }
    std::ostringstream os;
    os << "r(t) never drops below " << threshold;
    throw Error(ErrorKind::NoCrossing, "transition", os.str());
}

Trajectory integrate_to_verdict(const SimConfig& config, const Horizon& horizon) {
    SimConfig cfg = config;
    cfg.stop_on_verdict = true;
    cfg.t_max = horizon.t_initial;
    Trajectory traj = integrate(cfg);
    double total = cfg.t_max;
    while (traj.verdict == Verdict::Undecided) {
        if (2.0 * total > horizon.t_cap) {
            std::ostringstream os;
            os << "verdict undecided at eps=" << config.epsilon << ", alpha=" << config.alpha_init
               << " after t=" << total << " (cap " << horizon.t_cap << ")";
            throw Error(ErrorKind::Inconclusive, "transition", os.str());
        }
        SimConfig next = cfg;
        next.t_max = total;
        const Trajectory more = integrate_from(*traj.final_state, next);
        append(traj, more, total);
        total *= 2.0;
    }
    return traj;
}

CriticalCoupling find_critical_coupling(const SimConfig& base, double eps_lo, double eps_hi,
                                        double tol, const Horizon& horizon, const TrajectorySink& sink) {
    if (!(tol >= 1e-5)) {
        throw Error(ErrorKind::InvalidConfig, "transition", "critical-coupling tolerance must be >= 1e-5");
    }
    if (!(eps_lo < eps_hi)) {
        throw Error(ErrorKind::NoBracket, "transition", "need eps_lo < eps_hi");
    }
    CriticalCoupling out;
    auto probe = [&](double eps) {
        SimConfig cfg = base;
        cfg.epsilon = eps;
        BisectionStep step{eps};
        const Verdict v = verdict_at(cfg, horizon, step, sink);
        out.history.push_back(step);
        return v;
    };
    if (probe(eps_lo) != Verdict::Unsynchronised) {
        throw Error(ErrorKind::NoBracket, "transition", "lower coupling does not relax to the unsynchronised state");
    }
    if (probe(eps_hi) != Verdict::Synchronised) {
        throw Error(ErrorKind::NoBracket, "transition", "upper coupling does not synchronise");
    }
    double lo = eps_lo, hi = eps_hi;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid) == Verdict::Unsynchronised ? lo : hi) = mid;
    }
    out.lo = lo;
    out.hi = hi;
    out.epsilon_c = 0.5 * (lo + hi);
    return out;
}

Separatrix find_separatrix_alpha(const SimConfig& base, double alpha_lo, double alpha_hi, double tol,
                                 const Horizon& horizon, const TrajectorySink& sink) {
    if (!(alpha_lo >= 0.0 && alpha_lo < alpha_hi) || !(tol > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "transition", "need 0 <= alpha_lo < alpha_hi and tol > 0");
    }
    // One cutoff for the whole search, sized for the largest amplitude.
    SimConfig cfg = base;
    if (cfg.nmax == 0) cfg.nmax = choose_nmax(cfg.R, Complex(alpha_hi, 0.0));

    Separatrix out;
    auto probe = [&](double alpha) {
        SimConfig c = cfg;
        c.alpha_init = Complex(alpha, 0.0);
        BisectionStep step{alpha};
        const Verdict v = verdict_at(c, horizon, step, sink);
        out.history.push_back(step);
        return v;
    };
    if (probe(alpha_hi) != Verdict::Synchronised) {
        std::ostringstream os;
        os << "alpha=" << alpha_hi << " does not synchronise at eps=" << base.epsilon
           << "; only the unsynchronised state is reachable (eps <= eps_c)";
        throw Error(ErrorKind::NoSeparatrix, "transition", os.str());
    }
    if (probe(alpha_lo) != Verdict::Unsynchronised) {
        throw Error(ErrorKind::NoBracket, "transition", "lower amplitude already synchronises");
    }
    double lo = alpha_lo, hi = alpha_hi;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid) == Verdict::Unsynchronised ? lo : hi) = mid;
    }
    out.lo = lo;
    out.hi = hi;
    out.alpha_crit = 0.5 * (lo + hi);
    return out;
}

std::vector<SweepPoint> relaxation_sweep(const SimConfig& base, const std::vector<double>& couplings,
                                         double threshold, const Horizon& horizon, int jobs,
                                         const TrajectorySink& sink) {
    SimConfig cfg = base;
    std::mutex sink_mutex;
    cfg.r_threshold = threshold;
    if (cfg.nmax == 0) cfg.nmax = choose_nmax(cfg.R, cfg.alpha_init);
    return parallel_map(couplings, jobs, [&](double eps) {
        SimConfig c = cfg;
        c.epsilon = eps;
        const Trajectory traj = integrate_to_verdict(c, horizon);
        if (sink) {
            std::lock_guard lock(sink_mutex);
            sink(c, traj);
        }
        SweepPoint p{eps, std::numeric_limits<double>::quiet_NaN(), traj.verdict};
        if (traj.verdict == Verdict::Unsynchronised) p.t_relax = relaxation_time(traj, threshold);
        return p;
    });
}

std::vector<RelaxationPoint> filter_scaling_points(const std::vector<RelaxationPoint>& points,
                                                   double baseline_t) {
    std::vector<RelaxationPoint> kept;
    for (const auto& p : points) {
        if (p.t_relax >= baseline_t) kept.push_back(p);
    }
    return kept;
}

ScalingFit fit_at_critical_coupling(const std::vector<RelaxationPoint>& points, double epsilon_c) {
    check_points(points);
    if (!(epsilon_c > max_epsilon(points))) {
        throw Error(ErrorKind::InvalidConfig, "transition", "candidate eps_c must exceed every coupling");
    }
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(std::log1p(-p.epsilon / epsilon_c));
        y.push_back(std::log(p.t_relax));
    }
    const LineFit line = least_squares(x, y);
    ScalingFit fit;
    fit.epsilon_c = epsilon_c;
    fit.exponent_b = line.slope;
    fit.amplitude = std::exp(line.intercept);
    fit.residual = line.residual;
    for (const auto& p : points) fit.couplings_used.push_back(p.epsilon);
    return fit;
}

ScalingFit fit_critical_scaling(const std::vector<RelaxationPoint>& points,
                                const std::vector<double>& eps_c_grid) {
    check_points(points);
    const double top = max_epsilon(points);
    std::optional<ScalingFit> best;
    auto consider = [&](double candidate) {
        ScalingFit f = fit_at_critical_coupling(points, candidate);
        if (!best || f.residual < best->residual) best = std::move(f);
        return best->residual;
    };

    if (!eps_c_grid.empty()) {
        for (double c : eps_c_grid) {
            if (!(c > top)) {
                throw Error(ErrorKind::InvalidConfig, "transition", "every eps_c candidate must exceed max eps");
            }
            consider(c);
        }
        return *best;
    }

    // Coarse geometric grid of gaps eps_c - max eps in [1e-8, 0.5], then
    // linear zoom passes around the running argmin.
    constexpr int kCoarse = 400;
    constexpr int kZoom = 101;
    std::vector<double> gaps(kCoarse);
    for (int i = 0; i < kCoarse; ++i) {
        gaps[i] = 1e-8 * std::pow(0.5 / 1e-8, static_cast<double>(i) / (kCoarse - 1));
    }
    for (;;) {
        std::size_t arg = 0;
        double best_res = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            const double before = best ? best->residual : std::numeric_limits<double>::infinity();
            ScalingFit f = fit_at_critical_coupling(points, top + gaps[i]);
            if (f.residual < best_res) {
                best_res = f.residual;
                arg = i;
            }
            if (f.residual < before) best = std::move(f);
        }
        const double lo = gaps[arg == 0 ? 0 : arg - 1];
        const double hi = gaps[std::min(arg + 1, gaps.size() - 1)];
        if (hi - lo <= kGridResolution) {
            // Brent polish inside the last bracket; kept only if it improves.
            auto res = [&](double gap) { return fit_at_critical_coupling(points, top + gap).residual; };
            const auto [gap, r] = boost::math::tools::brent_find_minima(res, lo, hi, 52);
            if (r < best->residual) best = fit_at_critical_coupling(points, top + gap);
            break;
        }
        gaps.resize(kZoom);
        for (int i = 0; i < kZoom; ++i) gaps[i] = lo + (hi - lo) * i / (kZoom - 1);
    }
    return *best;
}

double scaling_range_breadth(const std::vector<RelaxationPoint>& points, double tol) {
    std::vector<RelaxationPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });
    double breadth = 0.0;
    for (std::size_t k = kMinFitPoints; k <= sorted.size(); ++k) {
        const std::vector<RelaxationPoint> top(sorted.begin(), sorted.begin() + static_cast<long>(k));
        const ScalingFit fit = fit_critical_scaling(top);
        const double rms = std::sqrt(fit.residual / static_cast<double>(k));
        if (rms < tol) breadth = std::max(breadth, 1.0 - top.back().epsilon / fit.epsilon_c);
    }
    return breadth;
}

}  // namespace qsync

#include "qsync/classical.hpp"

#include <cmath>
#include <sstream>

#include "qsync/error.hpp"

namespace qsync::classical {

void PotentialParams::validate() const {
    auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!ok(epsilon)) throw Error(ErrorKind::InvalidConfig, "classical", "invalid epsilon: must be > 0");
    if (!ok(f)) throw Error(ErrorKind::InvalidConfig, "classical", "invalid f: must be > 0");
    if (!ok(g)) throw Error(ErrorKind::InvalidConfig, "classical", "invalid g: must be > 0");
}

double potential(double r, const PotentialParams& p) {
    return r * r / (8.0 * p.epsilon) - p.f * r * r * r / 3.0 + p.g * r * r * r * r / 4.0;
}

double potential_derivative(double r, const PotentialParams& p) {
    return r * (p.g * r * r - p.f * r + 1.0 / (4.0 * p.epsilon));
}

double potential_curvature(double r, const PotentialParams& p) {
    return 3.0 * p.g * r * r - 2.0 * p.f * r + 1.0 / (4.0 * p.epsilon);
}

FixedPointSet fixed_points(const PotentialParams& p) {
    p.validate();
    FixedPointSet set;
    set.points.push_back({0.0, Stability::Stable});
    const double disc = p.f * p.f - p.g / p.epsilon;
    if (disc < 0.0) return set;
    const double root = std::sqrt(disc);
    if (root == 0.0) {
        set.points.push_back({p.f / (2.0 * p.g), Stability::Unstable});
        return set;
    }
    // r_- via the product of roots r_+ r_- = 1/(4 eps g) to avoid cancellation.
    const double r_plus = (p.f + root) / (2.0 * p.g);
    const double r_minus = 1.0 / (4.0 * p.epsilon * p.g * r_plus);
    set.points.push_back({r_minus, Stability::Unstable});
    set.points.push_back({r_plus, Stability::Stable});
    return set;
}

double classical_critical_coupling(double f, double g) {
    if (!(f > 0.0 && g > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "classical", "f and g must be > 0");
    }
    return g / (f * f);
}

namespace {

double rk4(double r, double dt, const PotentialParams& p) {
    const double k1 = -potential_derivative(r, p);
    const double k2 = -potential_derivative(r + 0.5 * dt * k1, p);
    const double k3 = -potential_derivative(r + 0.5 * dt * k2, p);
    const double k4 = -potential_derivative(r + dt * k3, p);
    return r + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
}

void check_step(double r, long step) {
    if (!std::isfinite(r)) {
        std::ostringstream os;
        os << "order parameter diverged at step " << step;
        throw Error(ErrorKind::Divergence, "classical", os.str());
    }
}

}  // namespace

OrderParameterSeries integrate_order_parameter(double r0, const PotentialParams& params, double dt,
                                               double t_max, int record_stride) {
    params.validate();
    if (!(r0 >= 0.0)) throw Error(ErrorKind::InvalidConfig, "classical", "invalid r0: must be >= 0");
    if (!(dt > 0.0) || !(t_max > 0.0) || record_stride < 1) {
        throw Error(ErrorKind::InvalidConfig, "classical", "invalid dt/t_max/record_stride");
    }
    const long steps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
    OrderParameterSeries out;
    out.times.push_back(0.0);
    out.r.push_back(r0);
    double r = r0;
    for (long s = 1; s <= steps; ++s) {
        r = std::max(0.0, rk4(r, dt, params));
        check_step(r, s);
        if (s % record_stride == 0 || s == steps) {
            out.times.push_back(static_cast<double>(s) * dt);
            out.r.push_back(r);
        }
    }
    return out;
}

double bottleneck_time(const PotentialParams& params, double r0, double threshold, double dt,
                       double t_max) {
    params.validate();
    if (!(threshold > 0.0 && threshold < r0)) {
        throw Error(ErrorKind::InvalidConfig, "classical", "invalid threshold: need 0 < threshold < r0");
    }
    const long steps = static_cast<long>(std::ceil(t_max / dt));
    double r = r0;
    for (long s = 1; s <= steps; ++s) {
        const double next = std::max(0.0, rk4(r, dt, params));
        check_step(next, s);
        if (next < threshold) {
            const double frac = (r - threshold) / (r - next);
            return (static_cast<double>(s - 1) + frac) * dt;
        }
        r = next;
    }
    std::ostringstream os;
    os << "r did not fall below " << threshold << " before t=" << t_max;
    throw Error(ErrorKind::NoCrossing, "classical", os.str());
}

double basin_boundary(const PotentialParams& params, double lo, double hi, double tol, double dt) {
    const auto fps = fixed_points(params);
    if (fps.points.size() < 3) {
        throw Error(ErrorKind::NoSeparatrix, "classical", "no outer stable fixed point below the bifurcation");
    }
    const double outer = fps.points.back().r;
    const double inner = fps.points[1].r;
    // Classify by integrating until r is clearly in one basin.
    auto synchronises = [&](double r0) {
        double r = r0;
        const double margin = 0.5 * inner;
        for (long s = 0; s < 100000000L; ++s) {
            r = rk4(r, dt, params);
            if (r < margin) return false;
            if (std::abs(r - outer) < 0.5 * (outer - inner)) return true;
        }
        throw Error(ErrorKind::Inconclusive, "classical", "basin classification did not settle");
    };
    if (synchronises(lo) || !synchronises(hi)) {
        throw Error(ErrorKind::NoBracket, "classical", "[lo, hi] does not bracket the basin boundary");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (synchronises(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

FGMapping map_quantum_to_potential(double epsilon_c, const std::vector<double>& couplings,
                                   const std::vector<double>& stable_r) {
    if (couplings.empty() || couplings.size() != stable_r.size() || !(epsilon_c > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "classical", "mapping needs matching coupling/amplitude lists");
    }
    // With g = eps_c f^2, r_+(eps) = u(eps) / f, u = (1 + sqrt(1 - eps_c/eps)) / (2 eps_c).
    double su = 0.0, sr = 0.0;
    std::vector<double> u(couplings.size());
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        if (!(couplings[i] >= epsilon_c)) {
            throw Error(ErrorKind::InvalidConfig, "classical", "mapping couplings must be >= eps_c");
        }
        u[i] = (1.0 + std::sqrt(1.0 - epsilon_c / couplings[i])) / (2.0 * epsilon_c);
        su += u[i] * u[i];
        sr += u[i] * stable_r[i];
    }
    const double h = sr / su;  // 1/f
    FGMapping m;
    m.f = 1.0 / h;
    m.g = epsilon_c * m.f * m.f;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = u[i] * h - stable_r[i];
        m.residual += e * e;
    }
    return m;
}

}  // namespace qsync::classical

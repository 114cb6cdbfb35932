// Slower checks on full trajectories.

#include <doctest.h>

#include <cmath>

#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/fock.hpp"
#include "qsync/observables.hpp"
#include "qsync/transition.hpp"

using namespace qsync;

namespace {

SimConfig base(double R, double eps, double alpha) {
    SimConfig c;
    c.R = R;
    c.epsilon = eps;
    c.alpha_init = alpha;
    return c;
}

double max_diag_gap(const DensityMatrix& rho, const std::vector<double>& p) {
    double gap = 0.0;
    for (int n = 0; n <= rho.nmax(); ++n) gap = std::max(gap, std::abs(rho(n, n).real() - p[n]));
    return gap;
}

}  // namespace

TEST_CASE("separatrix lies below 2.75 at eps = 3.5") {
    const auto sep = find_separatrix_alpha(base(0.04, 3.5, 2.75), 0.1, 2.75, 0.05);
    CHECK(sep.alpha_crit < 2.75);
    CHECK(sep.alpha_crit > 0.1);
    CHECK(sep.hi - sep.lo < 0.05);
    for (const auto& step : sep.history) {
        if (step.value <= sep.lo) CHECK(step.verdict == Verdict::Unsynchronised);
        if (step.value >= sep.hi) CHECK(step.verdict == Verdict::Synchronised);
    }
}

TEST_CASE("no separatrix below the critical coupling") {
    try {
        find_separatrix_alpha(base(0.04, 2.0, 2.75), 0.1, 2.75, 0.05);
        FAIL("expected NoSeparatrix");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoSeparatrix);
    }
}

TEST_CASE("unsynchronised long-time state does not depend on the coupling") {
    const auto oracle = exact_unsynchronised_steady_state(0.04, 80);
    for (double eps : {0.5, 2.0}) {
        SimConfig c = base(0.04, eps, 2.75);
        c.stop_on_verdict = false;
        c.check_positivity = false;
        c.t_max = 150.0;
        c.record_stride = 5000;
        const Trajectory t = integrate(c);
        CHECK(t.nmax == 80);
        CHECK(t.verdict == Verdict::Unsynchronised);
        CHECK(max_diag_gap(*t.final_state, oracle) < 1e-6);
    }
}

TEST_CASE("ten more number states barely move a near-critical trajectory") {
    SimConfig a = base(0.04, 2.9, 2.75);
    a.t_max = 40.0;
    a.check_positivity = false;
    SimConfig b = a;
    b.nmax = a.resolved_nmax() + 10;
    const Trajectory ta = integrate(a);
    const Trajectory tb = integrate(b);
    REQUIRE(ta.size() == tb.size());
    double sup = 0.0;
    for (std::size_t k = 0; k < ta.size(); ++k) sup = std::max(sup, std::abs(ta.r[k] - tb.r[k]));
    CHECK(sup < 1e-8);
}

TEST_CASE("synchronised state has the broader number distribution") {
    const Trajectory t = integrate_to_verdict(base(0.045, 4.4, 2.6), {});
    REQUIRE(t.verdict == Verdict::Synchronised);
    const auto sync = number_distribution(*t.final_state);
    NumberDistribution unsync{exact_unsynchronised_steady_state(0.045, t.nmax)};
    CHECK(entropic_number_uncertainty(sync) > entropic_number_uncertainty(unsync));
    double mean_unsync = 0.0;
    for (std::size_t n = 0; n < unsync.p.size(); ++n) mean_unsync += n * unsync.p[n];
    CHECK(expect_n(*t.final_state) < mean_unsync);
    CHECK(sync.p[0] > unsync.p[0]);
}

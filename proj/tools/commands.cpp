#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "output.hpp"
#include "qsync/classical.hpp"
#include "qsync/error.hpp"
#include "qsync/observables.hpp"
#include "qsync/parallel.hpp"
#include "qsync/transition.hpp"

namespace qsync::cli {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, "cli", msg); }

std::string tag(double eps) { return "eps_" + format_double(eps); }

json state_summary(const DensityMatrix& rho) {
    const auto pn = number_distribution(rho);
    const auto pphi = phase_distribution(rho, default_phase_grid_size(rho.nmax()));
    const double dn = entropic_number_uncertainty(pn);
    const double dphi = entropic_phase_uncertainty(pphi);
    return {{"r", std::abs(expect_a(rho))},
            {"n_expect", expect_n(rho)},
            {"n_mp", most_probable_n(pn)},
            {"delta_n", dn},
            {"delta_phi", dphi},
            {"uncertainty_excess", dn + dphi - std::log(2.0 * std::acos(-1.0))}};
}

DensityMatrix diagonal_state(const std::vector<double>& p) {
    ComplexMatrix m = ComplexMatrix::Zero(p.size(), p.size());
    for (std::size_t n = 0; n < p.size(); ++n) m(n, n) = p[n];
    return DensityMatrix::from_matrix(m);
}

json trajectory_summary(const Trajectory& t) {
    json j{{"verdict", to_string(t.verdict)},
           {"t_end", t.times.back()},
           {"r_final", t.r.back()},
           {"n_final", t.n_expect.back()},
           {"records", t.size()},
           {"steps", t.steps},
           {"nmax", t.nmax},
           {"dt", t.dt},
           {"max_boundary_occupation", t.max_boundary_occupation},
           {"truncation_warning", t.truncation_warning}};
    j["t_relax"] = t.verdict == Verdict::Unsynchronised ? json(relaxation_time(t, kDefaultRelaxThreshold)) : json();
    double worst = 0.0;
    for (double e : t.trace_error) worst = std::max(worst, e);
    j["max_trace_error"] = worst;
    double min_eig = std::numeric_limits<double>::infinity();
    for (double e : t.min_eigenvalue)
        if (!std::isnan(e)) min_eig = std::min(min_eig, e);
    j["min_eigenvalue"] = std::isfinite(min_eig) ? json(min_eig) : json();
    return j;
}

std::vector<double> required_couplings(const Settings& s) {
    auto c = s.numbers("couplings");
    if (c.empty()) bad("invalid couplings: the list is empty");
    return c;
}

void write_manifest(const fs::path& dir, const std::string& command, const Settings& s) {
    json j;
    j["command"] = command;
    j["output_dir"] = dir.string();
    j["seedless"] = true;
    j["settings"] = s.values();
    write_json(dir / "manifest.json", j);
}

json cmd_simulate(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    const Trajectory t = integrate(sim_config(s));
    write_trajectory_csv(dir / "trajectory.csv", t);
    write_number_csv(dir / "final_number.csv", number_distribution(*t.final_state));
    write_phase_csv(dir / "final_phase.csv",
                    phase_distribution(*t.final_state, default_phase_grid_size(t.nmax)));
    json j = trajectory_summary(t);
    write_json(dir / "result.json", j);
    return j;
}

json cmd_steady(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    const SimConfig base = sim_config(s);
    const Horizon h = horizon(s);
    std::vector<double> couplings = s.has("couplings") ? s.numbers("couplings") : std::vector<double>{base.epsilon};

    // The unsynchronised long-time state is epsilon independent: use the oracle.
    const auto oracle = exact_unsynchronised_steady_state(base.R, base.nmax);
    const auto unsync = diagonal_state(oracle);
    write_number_csv(dir / "number_unsynchronised.csv", {oracle});
    json result;
    result["unsynchronised"] = state_summary(unsync);

    auto states = parallel_map(couplings, s.integer("jobs"), [&](double eps) {
        SimConfig c = base;
        c.epsilon = eps;
        Trajectory t = integrate_to_verdict(c, h);
        return std::pair{t.verdict, *t.final_state};
    });
    std::string table = "epsilon,verdict,r,n_expect,n_mp,delta_n,delta_phi,uncertainty_excess\n";
    json rows = json::array();
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        const auto& [verdict, rho] = states[i];
        const bool sync = verdict == Verdict::Synchronised;
        json row = sync ? state_summary(rho) : result["unsynchronised"];
        row["epsilon"] = couplings[i];
        row["verdict"] = to_string(verdict);
        row["state"] = sync ? "integrated" : "oracle";
        if (sync) {
            write_number_csv(dir / ("number_" + tag(couplings[i]) + ".csv"), number_distribution(rho));
            write_phase_csv(dir / ("phase_" + tag(couplings[i]) + ".csv"),
                            phase_distribution(rho, default_phase_grid_size(rho.nmax())));
        }
        table += num(couplings[i]) + "," + to_string(verdict) + "," + num(row["r"]) + "," +
                 num(row["n_expect"]) + "," + std::to_string(row["n_mp"].get<int>()) + "," +
                 num(row["delta_n"]) + "," + num(row["delta_phi"]) + "," + num(row["uncertainty_excess"]) + "\n";
        rows.push_back(row);
    }
    write_text(dir / "steady.csv", table);
    result["states"] = rows;
    write_json(dir / "steady.json", result);
    return result;
}

std::vector<SweepPoint> sweep_points(const Settings& s, const std::vector<double>& couplings) {
    return relaxation_sweep(sim_config(s), couplings, s.number("threshold"), horizon(s), s.integer("jobs"));
}

json cmd_sweep(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    const auto pts = sweep_points(s, required_couplings(s));
    write_sweep_csv(dir / "sweep.csv", pts);
    json j = json::array();
    for (const auto& p : pts) j.push_back({{"epsilon", p.epsilon}, {"t_relax", std::isnan(p.t_relax) ? json() : json(p.t_relax)}, {"verdict", to_string(p.verdict)}});
    return {{"points", j}};
}

json cmd_scaling(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    auto couplings = required_couplings(s);
    if (s.raw("baseline_epsilon") == "auto") {
        s.set("baseline_epsilon", format_double(0.1 * *std::max_element(couplings.begin(), couplings.end())));
    }
    const double baseline_eps = s.number("baseline_epsilon");
    std::vector<double> all = couplings;
    all.push_back(baseline_eps);
    auto pts = sweep_points(s, all);
    const SweepPoint baseline = pts.back();
    pts.pop_back();
    write_sweep_csv(dir / "sweep.csv", pts);
    if (baseline.verdict != Verdict::Unsynchronised) {
        bad("invalid baseline_epsilon: the weak-coupling reference did not relax");
    }
    std::vector<RelaxationPoint> rel;
    for (const auto& p : pts)
        if (p.verdict == Verdict::Unsynchronised) rel.push_back({p.epsilon, p.t_relax});
    const auto kept = filter_scaling_points(rel, baseline.t_relax);
    const ScalingFit fit = fit_critical_scaling(kept);
    json j = fit_json(fit, baseline.t_relax);
    j["baseline_epsilon"] = baseline_eps;
    write_json(dir / "fit.json", j);
    return j;
}

json bisection_history(const std::vector<BisectionStep>& steps) {
    json h = json::array();
    for (const auto& b : steps) h.push_back({{"value", b.value}, {"verdict", to_string(b.verdict)}, {"t_used", b.t_used}});
    return h;
}

json cmd_critical(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    const auto cc = find_critical_coupling(sim_config(s), s.number("eps_lo"), s.number("eps_hi"), s.number("tol"), horizon(s));
    json j{{"epsilon_c", cc.epsilon_c}, {"lo", cc.lo}, {"hi", cc.hi}, {"history", bisection_history(cc.history)}};
    write_json(dir / "critical.json", j);
    return j;
}

json cmd_separatrix(Settings& s, const fs::path& dir) {
    SimConfig probe = sim_config(s);
    if (probe.nmax == 0) s.set("nmax", std::to_string(choose_nmax(probe.R, Complex(s.number("alpha_hi"), 0.0))));
    const auto sep = find_separatrix_alpha(sim_config(s), s.number("alpha_lo"), s.number("alpha_hi"), s.number("tol"), horizon(s));
    json j{{"epsilon", s.number("epsilon")}, {"alpha_crit", sep.alpha_crit}, {"lo", sep.lo}, {"hi", sep.hi}, {"history", bisection_history(sep.history)}};
    write_json(dir / "separatrix.json", j);
    return j;
}

json cmd_wigner(Settings& s, const fs::path& dir) {
    resolve_in_place(s);
    const SimConfig c = sim_config(s);
    // Pass 1 locates the snapshot record points; pass 2 (bitwise identical
    // integration) captures the states there.
    const Trajectory first = integrate(c);
    std::vector<std::size_t> picks;
    json plan_json;
    if (s.has("snapshot_times")) {
        for (double t : s.numbers("snapshot_times")) {
            auto it = std::lower_bound(first.times.begin(), first.times.end(), t - 1e-12);
            if (it == first.times.end()) bad("invalid snapshot_times: " + format_double(t) + " is beyond the trajectory");
            picks.push_back(static_cast<std::size_t>(it - first.times.begin()));
        }
    } else {
        const auto plan = plan_snapshots(first.times, first.r, s.numbers("snapshot_fractions"));
        picks = plan.indices;
        plan_json = {{"plateau_r", plan.plateau}, {"plateau_t", first.times[plan.plateau_index]}};
    }
    std::vector<double> want;
    for (auto k : picks) want.push_back(first.times[k]);
    std::vector<std::optional<DensityMatrix>> states(picks.size());
    std::size_t record = 0;
    integrate(c, [&](double, const DensityMatrix& rho) {
        for (std::size_t i = 0; i < picks.size(); ++i)
            if (picks[i] == record) states[i] = rho;
        ++record;
    });

    const double extent = s.raw("wigner_extent") == "auto" ? wigner_extent(first.nmax) : s.number("wigner_extent");
    const auto axis = symmetric_axis(extent, s.integer("wigner_points"));
    write_trajectory_csv(dir / "trajectory.csv", first);
    json snaps = json::array();
    for (std::size_t i = 0; i < picks.size(); ++i) {
        const auto& rho = *states[i];
        const auto w = wigner(rho, axis, axis);
        const std::string stem = "snapshot_" + std::to_string(i + 1);
        write_wigner_csv(dir / (stem + "_wigner.csv"), w);
        write_number_csv(dir / (stem + "_number.csv"), number_distribution(rho));
        json sj = state_summary(rho);
        sj["t"] = want[i];
        sj["wigner_min"] = w.values.minCoeff();
        sj["wigner_max"] = w.values.maxCoeff();
        sj["wigner_integral"] = w.integral();
        snaps.push_back(sj);
    }
    json j = trajectory_summary(first);
    j["plan"] = plan_json;
    j["snapshots"] = snaps;
    write_json(dir / "snapshots.json", j);
    return j;
}

json cmd_classical(Settings& s, const fs::path& dir) {
    const std::string mode = s.raw("classical_mode");
    const double f = s.number("f"), g = s.number("g");
    const double ec = classical::classical_critical_coupling(f, g);
    json j{{"model", "classical"}, {"f", f}, {"g", g}, {"epsilon_c", ec}};
    if (mode == "fixed_points") {
        const auto fp = classical::fixed_points(potential_params(s));
        json pts = json::array();
        for (const auto& p : fp.points) {
            pts.push_back({{"r", p.r}, {"stability", p.stability == classical::Stability::Stable ? "stable" : "unstable"}});
        }
        j["epsilon"] = s.number("epsilon");
        j["points"] = pts;
        write_json(dir / "fixed_points.json", j);
    } else if (mode == "trajectory") {
        const auto series = classical::integrate_order_parameter(s.number("r0"), potential_params(s), s.number("classical_dt"),
                                                                 s.number("tmax"), s.integer("record_stride"));
        write_order_parameter_csv(dir / "classical_trajectory.csv", series);
        j["epsilon"] = s.number("epsilon");
        j["r_final"] = series.r.back();
        write_json(dir / "result.json", j);
    } else if (mode == "sweep") {
        const auto couplings = required_couplings(s);
        const double r0 = s.number("r0"), thr = s.number("threshold"), cdt = s.number("classical_dt");
        auto pts = parallel_map(couplings, s.integer("jobs"), [&](double eps) {
            classical::PotentialParams p{eps, f, g};
            p.validate();
            if (eps >= ec) return SweepPoint{eps, kNaN, Verdict::Synchronised};
            return SweepPoint{eps, classical::bottleneck_time(p, r0, thr, cdt), Verdict::Unsynchronised};
        });
        write_sweep_csv(dir / "sweep.csv", pts, "classical");
        std::vector<RelaxationPoint> rel;
        for (const auto& p : pts)
            if (p.verdict == Verdict::Unsynchronised) rel.push_back({p.epsilon, p.t_relax});
        json fit = fit_json(fit_critical_scaling(rel), kNaN);
        fit["model"] = "classical";
        write_json(dir / "fit.json", fit);
        j["fit"] = fit;
    } else if (mode == "map") {
        const auto m = classical::map_quantum_to_potential(s.number("quantum_eps_c"), required_couplings(s), s.numbers("stable_r"));
        j = {{"model", "classical"}, {"f", m.f}, {"g", m.g}, {"residual", m.residual}, {"epsilon_c", s.number("quantum_eps_c")}};
        write_json(dir / "mapping.json", j);
    } else {
        bad("invalid classical_mode: '" + mode + "' (fixed_points, trajectory, sweep or map)");
    }
    return j;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"simulate", "steady",  "sweep",  "critical",
                                                   "separatrix", "scaling", "wigner", "classical"};
    return names;
}

json run_command(const std::string& command, Settings settings, const fs::path& out_dir) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end()) bad("unknown command '" + command + "'");
    // Validate everything before any compute starts.
    if (command != "classical") sim_config(settings), horizon(settings);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cli", "cannot create " + out_dir.string() + ": " + ec.message());
    settings.set("out", out_dir.string());

    json summary;
    if (command == "simulate") summary = cmd_simulate(settings, out_dir);
    else if (command == "steady") summary = cmd_steady(settings, out_dir);
    else if (command == "sweep") summary = cmd_sweep(settings, out_dir);
    else if (command == "scaling") summary = cmd_scaling(settings, out_dir);
    else if (command == "critical") summary = cmd_critical(settings, out_dir);
    else if (command == "separatrix") summary = cmd_separatrix(settings, out_dir);
    else if (command == "wigner") summary = cmd_wigner(settings, out_dir);
    else summary = cmd_classical(settings, out_dir);
    write_manifest(out_dir, command, settings);
    return summary;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig1", "fig2", "fig4", "fig5", "fig6"};
    return names;
}

namespace {

PresetMember member(std::string name, std::string command, std::initializer_list<std::pair<const char*, std::string>> kv) {
    Settings s = Settings::defaults();
    for (const auto& [k, v] : kv) s.set(k, v);
    return {std::move(name), std::move(command), std::move(s)};
}

std::vector<PresetMember> preset_members(const std::string& name) {
    std::vector<PresetMember> out;
    if (name == "fig1") {
        for (const char* eps : {"0.5", "1", "1.5", "2", "2.5", "3", "3.5"}) {
            out.push_back(member(std::string("eps_") + eps, "simulate",
                                 {{"R", "0.04"}, {"alpha", "2.75"}, {"epsilon", eps}, {"tmax", "200"},
                                  {"record_stride", "100"}, {"stop_on_verdict", "false"}}));
        }
    } else if (name == "fig2") {
        for (const char* a : {"1", "1.5", "2", "2.5", "2.75"}) {
            out.push_back(member(std::string("alpha_") + a, "simulate",
                                 {{"R", "0.04"}, {"epsilon", "3.5"}, {"alpha", a}, {"tmax", "200"},
                                  {"record_stride", "100"}, {"stop_on_verdict", "false"}}));
        }
        for (const char* eps : {"3", "3.25", "3.5", "3.75", "4"}) {
            out.push_back(member(std::string("separatrix_eps_") + eps, "separatrix",
                                 {{"R", "0.04"}, {"epsilon", eps}, {"alpha_lo", "0.1"}, {"alpha_hi", "2.75"},
                                  {"tol", "0.01"}}));
        }
    } else if (name == "fig4") {
        out.push_back(member("R_0.02", "steady", {{"R", "0.02"}, {"epsilon", "1.06"}, {"alpha", "5"}}));
        out.push_back(member("R_0.045", "steady", {{"R", "0.045"}, {"epsilon", "4.4"}, {"alpha", "2.6"}}));
        out.push_back(member("R_0.04", "steady",
                             {{"R", "0.04"}, {"alpha", "2.75"}, {"epsilon", "3.5"},
                              {"couplings", "2,2.5,2.9,3,3.25,3.5,3.75,4"}}));
    } else if (name == "fig5") {
        out.push_back(member("R_0.04_eps_2.9", "wigner",
                             {{"R", "0.04"}, {"epsilon", "2.9"}, {"alpha", "2.75"}, {"record_stride", "50"}}));
    } else if (name == "fig6") {
        out.push_back(member("R_0.045", "scaling",
                             {{"R", "0.045"}, {"alpha", "2.6"},
                              {"couplings", "4,4.1,4.2,4.25,4.28,4.3,4.31,4.32,4.325,4.328,4.33"}}));
        out.push_back(member("R_0.04", "scaling",
                             {{"R", "0.04"}, {"alpha", "2.75"},
                              {"couplings", "2.8,2.85,2.875,2.88,2.89,2.9,2.91,2.915,2.92,2.925,2.928,2.929,2.93"}}));
    } else {
        bad("unknown preset '" + name + "'");
    }
    return out;
}

}  // namespace

std::vector<PresetMember> expand_preset(const std::string& name, const std::map<std::string, std::string>& overrides) {
    auto members = preset_members(name);
    // Presets spanning several R: an R override picks the matching runs.
    if (auto it = overrides.find("R"); it != overrides.end() && (name == "fig4" || name == "fig6")) {
        Settings probe = Settings::defaults();
        probe.set("R", it->second);
        const double want = probe.number("R");
        std::vector<PresetMember> kept;
        std::string have;
        for (auto& m : members) {
            have += (have.empty() ? "" : ", ") + m.settings.raw("R");
            if (std::abs(m.settings.number("R") - want) <= 1e-12) kept.push_back(std::move(m));
        }
        if (kept.empty()) bad("invalid R: preset " + name + " has runs at R = " + have);
        members = std::move(kept);
    }
    for (auto& m : members) {
        for (const auto& [k, v] : overrides) m.settings.set(k, v);
    }
    return members;
}

json run_preset(const std::string& name, const std::map<std::string, std::string>& overrides, const fs::path& out_dir,
                int jobs) {
    auto members = expand_preset(name, overrides);
    for (auto& m : members) {
        m.settings.set("jobs", "1");
        if (m.command != "classical") sim_config(m.settings), horizon(m.settings);
    }
    const auto results = parallel_map(members, jobs, [&](const PresetMember& m) {
        return run_command(m.command, m.settings, out_dir / m.name);
    });
    json j{{"preset", name}, {"members", json::array()}};
    for (std::size_t i = 0; i < members.size(); ++i) {
        j["members"].push_back({{"name", members[i].name}, {"command", members[i].command}, {"result", results[i]}});
    }
    write_json(out_dir / "preset.json", j);
    return j;
}

SnapshotPlan plan_snapshots(const std::vector<double>& times, const std::vector<double>& r,
                            const std::vector<double>& fractions) {
    if (r.size() < 3) bad("trajectory too short for snapshots");
    SnapshotPlan plan;
    auto rate = [&](std::size_t k) { return std::abs(r[k + 1] - r[k - 1]) / (times[k + 1] - times[k - 1]); };
    // Start past the initial transient: from the largest r, skip ahead while
    // the decay is still accelerating away from that maximum.
    std::size_t k = std::max<std::size_t>(1, std::max_element(r.begin(), r.end()) - r.begin());
    while (k + 2 < r.size() && rate(k + 1) >= rate(k)) ++k;
    // The plateau is the slowest point between there and the steepest part
    // of the final drop.
    std::size_t steepest = k;
    for (std::size_t j = k; j + 1 < r.size(); ++j)
        if (rate(j) > rate(steepest)) steepest = j;
    plan.plateau_index = k;
    double slowest = std::numeric_limits<double>::infinity();
    for (; k < steepest; ++k) {
        if (rate(k) < slowest) {
            slowest = rate(k);
            plan.plateau_index = k;
        }
    }
    plan.plateau = r[plan.plateau_index];
    for (double f : fractions) {
        k = plan.plateau_index;
        while (k < r.size() && r[k] > f * plan.plateau) ++k;
        if (k == r.size()) bad("invalid snapshot_fractions: r never falls to " + format_double(f) + " x plateau");
        plan.indices.push_back(k);
    }
    return plan;
}

}  // namespace qsync::cli

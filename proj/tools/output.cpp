#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qsync/error.hpp"

namespace qsync::cli {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "cli", "cannot write " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::ostringstream os;
    os << "t,re_a,im_a,r,n_expect,n_mp,delta_n,delta_phi,trace_err\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << num(traj.times[k]) << ',' << num(traj.a_expect[k].real()) << ','
           << num(traj.a_expect[k].imag()) << ',' << num(traj.r[k]) << ',' << num(traj.n_expect[k]) << ','
           << traj.n_mp[k] << ',' << num(traj.delta_n[k]) << ',' << num(traj.delta_phi[k]) << ','
           << num(traj.trace_error[k]) << '\n';
    }
    write_text(path, os.str());
}

void write_number_csv(const fs::path& path, const NumberDistribution& dist) {
    std::ostringstream os;
    os << "n,p\n";
    for (std::size_t n = 0; n < dist.p.size(); ++n) os << n << ',' << num(dist.p[n]) << '\n';
    write_text(path, os.str());
}

void write_phase_csv(const fs::path& path, const PhaseDistribution& dist) {
    std::ostringstream os;
    os << "phi,density\n";
    for (std::size_t k = 0; k < dist.grid.size(); ++k) os << num(dist.grid[k]) << ',' << num(dist.values[k]) << '\n';
    write_text(path, os.str());
}

void write_wigner_csv(const fs::path& path, const WignerGrid& grid) {
    std::ostringstream os;
    os << "x\\p";
    for (double p : grid.p_axis) os << ',' << num(p);
    os << '\n';
    for (std::size_t i = 0; i < grid.x_axis.size(); ++i) {
        os << num(grid.x_axis[i]);
        for (std::size_t j = 0; j < grid.p_axis.size(); ++j) os << ',' << num(grid.values(i, j));
        os << '\n';
    }
    write_text(path, os.str());
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepPoint>& points, const std::string& model) {
    std::ostringstream os;
    os << "epsilon,t_relax,verdict" << (model.empty() ? "" : ",model") << '\n';
    for (const auto& p : points) {
        os << num(p.epsilon) << ',' << num(p.t_relax) << ',' << to_string(p.verdict);
        if (!model.empty()) os << ',' << model;
        os << '\n';
    }
    write_text(path, os.str());
}

void write_order_parameter_csv(const fs::path& path, const classical::OrderParameterSeries& series) {
    std::ostringstream os;
    os << "t,r,model\n";
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        os << num(series.times[k]) << ',' << num(series.r[k]) << ",classical\n";
    }
    write_text(path, os.str());
}

nlohmann::json fit_json(const ScalingFit& fit, double filter_baseline) {
    nlohmann::json j;
    j["epsilon_c"] = fit.epsilon_c;
    j["b"] = fit.exponent_b;
    j["amplitude"] = fit.amplitude;
    j["residual"] = fit.residual;
    j["n_points"] = fit.couplings_used.size();
    j["filter_baseline"] = std::isnan(filter_baseline) ? nlohmann::json() : nlohmann::json(filter_baseline);
    j["couplings_used"] = fit.couplings_used;
    return j;
}

}  // namespace qsync::cli

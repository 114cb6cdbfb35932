#pragma once

// CSV and JSON artifact writers. Numbers are written with 17 significant
// digits so every double round-trips.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsync/classical.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/observables.hpp"
#include "qsync/transition.hpp"

namespace qsync::cli {

namespace fs = std::filesystem;

std::string num(double v);

void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const nlohmann::json& j);

/// t, re_a, im_a, r, n_expect, n_mp, delta_n, delta_phi, trace_err
void write_trajectory_csv(const fs::path& path, const Trajectory& traj);
/// n, p
void write_number_csv(const fs::path& path, const NumberDistribution& dist);
/// phi, density
void write_phase_csv(const fs::path& path, const PhaseDistribution& dist);
/// First row: "x\p" then the p axis; each further row: x then W(x, p_j).
void write_wigner_csv(const fs::path& path, const WignerGrid& grid);
/// epsilon, t_relax, verdict [, model]
void write_sweep_csv(const fs::path& path, const std::vector<SweepPoint>& points,
                     const std::string& model = "");
/// t, r, model
void write_order_parameter_csv(const fs::path& path, const classical::OrderParameterSeries& series);

nlohmann::json fit_json(const ScalingFit& fit, double filter_baseline);

}  // namespace qsync::cli

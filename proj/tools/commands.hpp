#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "settings.hpp"

namespace qsync::cli {

const std::vector<std::string>& command_names();

/// Runs one command into `out_dir` (created if needed): writes its artifacts
/// and manifest.json, and returns a JSON summary of the result.
nlohmann::json run_command(const std::string& command, Settings settings, const std::filesystem::path& out_dir);

struct PresetMember {
    std::string name;  // subdirectory of the preset's output directory
    std::string command;
    Settings settings;
};

const std::vector<std::string>& preset_names();

/// Expands a preset into its member runs. `overrides` (keys set explicitly
/// by the user) replace the preset's values field by field; an R override
/// selects the members run at that R.
std::vector<PresetMember> expand_preset(const std::string& name, const std::map<std::string, std::string>& overrides);

/// Runs every member into out_dir/<member.name>, up to `jobs` at a time.
nlohmann::json run_preset(const std::string& name, const std::map<std::string, std::string>& overrides,
                          const std::filesystem::path& out_dir, int jobs);

/// Snapshot selection for decay pictures. The plateau is r where the slow
/// stage (after any initial overshoot) decays most slowly; for each fraction
/// the plan holds the first later record with r <= fraction * plateau.
struct SnapshotPlan {
    double plateau = 0.0;
    std::size_t plateau_index = 0;
    std::vector<std::size_t> indices;
};
SnapshotPlan plan_snapshots(const std::vector<double>& times, const std::vector<double>& r,
                            const std::vector<double>& fractions);

}  // namespace qsync::cli

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "output.hpp"
#include "qsync/error.hpp"

namespace {

using nlohmann::json;
using qsync::cli::Settings;

int report(const qsync::Error& e, const std::string& out_dir) {
    json j{{"error", {{"kind", std::string(qsync::to_string(e.kind()))}, {"module", e.module()}, {"message", e.what()}}}};
    std::cerr << j.dump() << '\n';
    std::error_code ec;
    const int code = e.kind() == qsync::ErrorKind::InvalidConfig ? 2 : 1;
    if (out_dir.empty()) return code;
    std::filesystem::create_directories(out_dir, ec);
    if (!ec) {
        try {
            qsync::cli::write_json(std::filesystem::path(out_dir) / "error.json", j);
        } catch (const qsync::Error&) {
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field synchronisation of quantum van der Pol oscillators"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    std::vector<std::string> assignments;
    app.add_option("--config", config, "settings file (key = value lines, or manifest.json)");
    app.add_option("--set", assignments, "key=value, repeatable");

    // Flag name -> settings key.
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--R", "R"},       {"--epsilon", "epsilon"},     {"--alpha", "alpha"}, {"--nmax", "nmax"},
        {"--dt", "dt"},     {"--tmax", "tmax"},           {"--threshold", "threshold"},
        {"--jobs", "jobs"}, {"--out", "out"},
    };
    std::map<std::string, std::string> flag_values;
    for (const auto& [flag, key] : flags) {
        app.add_option(flag, flag_values[key], "sets " + key);
    }

    std::string command;
    for (const auto& name : qsync::cli::command_names()) {
        app.add_subcommand(name, "run " + name)->callback([&command, name] { command = name; });
    }
    std::string preset;
    auto* preset_cmd = app.add_subcommand("preset", "run every member of a named preset");
    preset_cmd->add_option("name", preset, "fig1, fig2, fig4, fig5 or fig6")->required();
    preset_cmd->callback([&command] { command = "preset"; });

    CLI11_PARSE(app, argc, argv);

    Settings s = Settings::defaults();
    try {
        if (!config.empty()) s.merge_file(config);
        s.merge_environment();
        for (const auto& [flag, key] : flags) {
            if (app.count(flag) > 0) s.set(key, flag_values[key]);
        }
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) {
                throw qsync::Error(qsync::ErrorKind::InvalidConfig, "cli", "--set expects key=value, got '" + a + "'");
            }
            s.set(a.substr(0, eq), a.substr(eq + 1));
        }

        json summary;
        if (command == "preset") {
            auto overrides = s.explicit_values();
            overrides.erase("out");
            overrides.erase("jobs");
            summary = qsync::cli::run_preset(preset, overrides, s.raw("out"), s.integer("jobs"));
        } else {
            summary = qsync::cli::run_command(command, s, s.raw("out"));
        }
        std::cout << summary.dump(2) << '\n';
    } catch (const qsync::Error& e) {
        return report(e, s.raw("out"));
    }
    return 0;
}

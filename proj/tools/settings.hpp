#pragma once

// Flat key = value run settings. Layers, lowest precedence first: built-in
// defaults, a config file, QSYNC_<KEY> environment variables, command-line
// flags. Every value is kept as text until a command asks for a typed view,
// so the resolved set can be echoed verbatim to manifest.json.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qsync/classical.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/transition.hpp"

namespace qsync::cli {

struct KeySpec {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Every recognised key with its default ("" means unset).
const std::vector<KeySpec>& known_keys();

class Settings {
public:
    /// All keys at their defaults.
    static Settings defaults();

    /// Parses `key = value` lines ('#' starts a comment) or a flat JSON object
    /// (as written to manifest.json). Unknown keys are errors.
    void merge_file(const std::string& path);
    void merge_text(const std::string& text, const std::string& origin);
    /// QSYNC_<KEY> variables, key upper-cased.
    void merge_environment();
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    /// Keys assigned through set() or a merge, i.e. not left at their default.
    std::map<std::string, std::string> explicit_values() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

/// Physical and numerical parameters of one trajectory. `nmax = auto`
/// resolves through choose_nmax.
SimConfig sim_config(const Settings& s);
Horizon horizon(const Settings& s);
classical::PotentialParams potential_params(const Settings& s);

/// Writes resolved numerics (nmax, and anything derived) back so the echo
/// reproduces the run when fed back as a config.
void resolve_in_place(Settings& s);

std::string format_double(double v);

}  // namespace qsync::cli

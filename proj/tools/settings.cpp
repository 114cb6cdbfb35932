#include "settings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qsync/error.hpp"

namespace qsync::cli {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, "cli", msg); }

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        bad("invalid " + key + ": '" + text + "' is not a number");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    // Shortest text that round-trips exactly.
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        // trajectory
        {"R", "0.04", "kappa2/kappa1"},
        {"epsilon", "0", "mean-field coupling (units of kappa1)"},
        {"alpha", "2.75", "real part of the initial coherent amplitude"},
        {"alpha_im", "0", "imaginary part of the initial coherent amplitude"},
        {"nmax", "auto", "number-basis cutoff, or auto"},
        {"dt", "0.001", "RK4 step"},
        {"tmax", "1000", "integration horizon"},
        {"record_stride", "500", "steps between recorded points"},
        {"threshold", "0.005", "r below which the state counts as unsynchronised"},
        {"sync_window", "50", "trailing window for the synchronised verdict"},
        {"sync_tolerance", "1e-6", "max - min of r over the window"},
        {"coupling_update", "per_stage", "per_stage or per_step"},
        {"check_positivity", "true", "minimum eigenvalue at record points"},
        {"stop_on_verdict", "true", "stop as soon as a verdict fires"},
        // orchestration
        {"jobs", "1", "concurrent trajectories"},
        {"out", "out", "output directory"},
        {"t_initial", "500", "first horizon of adaptive runs"},
        {"t_cap", "1048576", "largest horizon of adaptive runs"},
        // sweep / scaling / steady
        {"couplings", "", "comma-separated coupling list"},
        {"baseline_epsilon", "auto", "weak-coupling filter reference (auto: 0.1 x max coupling)"},
        // critical / separatrix
        {"eps_lo", "2.6", "lower bracket end (unsynchronised)"},
        {"eps_hi", "3.2", "upper bracket end (synchronised)"},
        {"alpha_lo", "0.1", "lower amplitude bracket end"},
        {"alpha_hi", "2.75", "upper amplitude bracket end"},
        {"tol", "0.001", "bisection tolerance"},
        // wigner
        {"snapshot_fractions", "0.9,0.7,0.5,0.3,0.1", "r / plateau at which to snapshot the decay"},
        {"snapshot_times", "", "explicit snapshot times (overrides fractions)"},
        {"wigner_points", "101", "grid points per axis"},
        {"wigner_extent", "auto", "half-width of the grid (auto: sqrt(2 nmax) + 3)"},
        // classical
        {"classical_mode", "trajectory", "fixed_points, trajectory, sweep or map"},
        {"f", "1", "cubic coefficient of V(r)"},
        {"g", "1", "quartic coefficient of V(r)"},
        {"r0", "0.8", "initial order parameter"},
        {"classical_dt", "0.0001", "RK4 step of the order-parameter flow"},
        {"stable_r", "", "synchronised amplitudes at each coupling (map mode)"},
        {"quantum_eps_c", "", "critical coupling to map onto (map mode)"},
    };
    return keys;
}

Settings Settings::defaults() {
    Settings s;
    for (const auto& k : known_keys()) s.values_[k.name] = k.default_value;
    return s;
}

void Settings::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) bad("unknown key '" + key + "'");
    it->second = trim(value);
    explicit_.insert(key);
}

std::map<std::string, std::string> Settings::explicit_values() const {
    std::map<std::string, std::string> out;
    for (const auto& k : explicit_) out[k] = values_.at(k);
    return out;
}

void Settings::merge_text(const std::string& text, const std::string& origin) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            bad(origin + ": " + e.what());
        }
        // manifest.json nests the settings; a bare object is accepted too.
        const nlohmann::json& obj = j.contains("settings") ? j["settings"] : j;
        for (const auto& [k, v] : obj.items()) set(k, v.is_string() ? v.get<std::string>() : v.dump());
        return;
    }
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bad(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void Settings::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cli", "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    merge_text(ss.str(), path);
}

void Settings::merge_environment() {
    for (const auto& k : known_keys()) {
        std::string var = "QSYNC_" + k.name;
        std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(var.c_str())) set(k.name, v);
    }
}

bool Settings::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& Settings::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) bad("unknown key '" + key + "'");
    return it->second;
}

double Settings::number(const std::string& key) const {
    if (!has(key)) bad("missing " + key);
    return parse_double(key, raw(key));
}

int Settings::integer(const std::string& key) const {
    const double v = number(key);
    if (v != static_cast<double>(static_cast<long>(v)) || std::abs(v) > 1e9) {
        bad("invalid " + key + ": '" + raw(key) + "' is not an integer");
    }
    return static_cast<int>(v);
}

bool Settings::flag(const std::string& key) const {
    const std::string v = lower(raw(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad("invalid " + key + ": '" + raw(key) + "' is not a boolean");
}

std::vector<double> Settings::numbers(const std::string& key) const {
    std::vector<double> out;
    std::string text = raw(key);
    // JSON arrays from manifest.json arrive as "[a,b]".
    std::erase_if(text, [](char c) { return c == '[' || c == ']' || c == '"'; });
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

SimConfig sim_config(const Settings& s) {
    SimConfig c;
    c.R = s.number("R");
    c.epsilon = s.number("epsilon");
    c.alpha_init = Complex(s.number("alpha"), s.number("alpha_im"));
    c.nmax = lower(s.raw("nmax")) == "auto" ? 0 : s.integer("nmax");
    if (lower(s.raw("nmax")) != "auto" && c.nmax < 2) bad("invalid nmax: must be >= 2 or auto");
    c.dt = s.number("dt");
    c.t_max = s.number("tmax");
    c.record_stride = s.integer("record_stride");
    c.r_threshold = s.number("threshold");
    c.sync_window = s.number("sync_window");
    c.sync_tolerance = s.number("sync_tolerance");
    const std::string mode = lower(s.raw("coupling_update"));
    if (mode == "per_stage") {
        c.coupling_update = CouplingUpdate::PerStage;
    } else if (mode == "per_step") {
        c.coupling_update = CouplingUpdate::PerStep;
    } else {
        bad("invalid coupling_update: '" + s.raw("coupling_update") + "' (per_stage or per_step)");
    }
    c.check_positivity = s.flag("check_positivity");
    c.stop_on_verdict = s.flag("stop_on_verdict");
    c.validate();
    return c;
}

Horizon horizon(const Settings& s) {
    Horizon h{s.number("t_initial"), s.number("t_cap")};
    if (!(h.t_initial > 0.0) || !(h.t_cap >= h.t_initial)) {
        bad("invalid t_cap: need 0 < t_initial <= t_cap");
    }
    return h;
}

classical::PotentialParams potential_params(const Settings& s) {
    classical::PotentialParams p{s.number("epsilon"), s.number("f"), s.number("g")};
    p.validate();
    return p;
}

void resolve_in_place(Settings& s) {
    const SimConfig c = sim_config(s);
    if (c.nmax == 0) s.set("nmax", std::to_string(c.resolved_nmax()));
}

}  // namespace qsync::cli

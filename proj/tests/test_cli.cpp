#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "qsync/error.hpp"
#include "settings.hpp"

using namespace qsync;
using namespace qsync::cli;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("qsync_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

Settings quick_run() {
    Settings s = Settings::defaults();
    s.set("R", "0.2");
    s.set("epsilon", "0.5");
    s.set("alpha", "1");
    s.set("tmax", "20");
    s.set("record_stride", "100");
    return s;
}

}  // namespace

TEST_CASE("defaults cover every key and reject unknown ones") {
    Settings s = Settings::defaults();
    for (const auto& k : known_keys()) CHECK(s.raw(k.name) == k.default_value);
    CHECK(s.explicit_values().empty());
    CHECK(kind_of([&] { s.set("epsilom", "1"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("key = value text with comments") {
    Settings s = Settings::defaults();
    s.merge_text("# run\nR = 0.045   # kappa ratio\n\nepsilon=4.3\n", "inline");
    CHECK(s.number("R") == 0.045);
    CHECK(s.number("epsilon") == 4.3);
    CHECK(s.explicit_values().size() == 2);
    CHECK(kind_of([&] { s.merge_text("R 0.1\n", "inline"); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([&] { s.merge_text("R = abc\n", "inline"); s.number("R"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("JSON objects, bare or nested under settings") {
    Settings a = Settings::defaults();
    a.merge_text(R"({"R": 0.02, "alpha": "5"})", "inline");
    CHECK(a.number("R") == 0.02);
    CHECK(a.number("alpha") == 5.0);
    Settings b = Settings::defaults();
    b.merge_text(R"({"command": "simulate", "settings": {"dt": "0.0005"}})", "inline");
    CHECK(b.number("dt") == 0.0005);
}

TEST_CASE("typed views") {
    Settings s = Settings::defaults();
    s.set("couplings", "[2.9, 2.91 ,2.92]");
    CHECK(s.numbers("couplings") == std::vector<double>{2.9, 2.91, 2.92});
    s.set("jobs", "2.5");
    CHECK(kind_of([&] { s.integer("jobs"); }) == ErrorKind::InvalidConfig);
    s.set("check_positivity", "off");
    CHECK_FALSE(s.flag("check_positivity"));
    s.set("check_positivity", "maybe");
    CHECK(kind_of([&] { s.flag("check_positivity"); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([&] { s.number("quantum_eps_c"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("file, then environment, then explicit set") {
    const auto dir = scratch("layers");
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "R = 0.045\nepsilon = 4\n";
    Settings s = Settings::defaults();
    s.merge_file((dir / "run.cfg").string());
    ::setenv("QSYNC_EPSILON", "4.2", 1);
    s.merge_environment();
    ::unsetenv("QSYNC_EPSILON");
    CHECK(s.number("R") == 0.045);
    CHECK(s.number("epsilon") == 4.2);
    s.set("epsilon", "4.3");
    CHECK(s.number("epsilon") == 4.3);
    CHECK(kind_of([&] { s.merge_file((dir / "missing.cfg").string()); }) == ErrorKind::Io);
}

TEST_CASE("sim_config validation and nmax resolution") {
    Settings s = Settings::defaults();
    CHECK(sim_config(s).nmax == 0);
    resolve_in_place(s);
    CHECK(s.integer("nmax") == 80);
    s.set("coupling_update", "sometimes");
    CHECK(kind_of([&] { sim_config(s); }) == ErrorKind::InvalidConfig);
    s.set("coupling_update", "per_step");
    CHECK(sim_config(s).coupling_update == CouplingUpdate::PerStep);
    s.set("dt", "0");
    CHECK(kind_of([&] { sim_config(s); }) == ErrorKind::InvalidConfig);
    s.set("dt", "0.001");
    s.set("t_cap", "100");
    CHECK(kind_of([&] { horizon(s); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("fig1 expands to seven couplings") {
    const auto m = expand_preset("fig1", {});
    REQUIRE(m.size() == 7);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i].command == "simulate");
        CHECK(m[i].settings.number("epsilon") == doctest::Approx(0.5 * (i + 1)));
        CHECK(m[i].settings.number("R") == 0.04);
        CHECK(m[i].settings.number("alpha") == 2.75);
    }
}

TEST_CASE("R override selects the matching runs") {
    const auto fig4 = expand_preset("fig4", {{"R", "0.02"}});
    REQUIRE(fig4.size() == 1);
    CHECK(fig4[0].command == "steady");
    CHECK(fig4[0].settings.number("epsilon") == 1.06);
    CHECK(fig4[0].settings.number("alpha") == 5.0);

    const auto fig6 = expand_preset("fig6", {{"R", "0.04"}});
    REQUIRE(fig6.size() == 1);
    CHECK(fig6[0].command == "scaling");
    CHECK(fig6[0].settings.number("alpha") == 2.75);

    CHECK(expand_preset("fig6", {}).size() == 2);
    CHECK(kind_of([] { expand_preset("fig4", {{"R", "0.3"}}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { expand_preset("fig3", {}); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("overrides replace fields individually") {
    const auto m = expand_preset("fig1", {{"dt", "0.0005"}, {"R", "0.045"}});
    for (const auto& p : m) {
        CHECK(p.settings.number("dt") == 0.0005);
        CHECK(p.settings.number("R") == 0.045);
        CHECK(p.settings.number("alpha") == 2.75);
    }
    const auto fig5 = expand_preset("fig5", {});
    REQUIRE(fig5.size() == 1);
    CHECK(fig5[0].command == "wigner");
    CHECK(fig5[0].settings.number("epsilon") == 2.9);
}

TEST_CASE("snapshot plan skips the overshoot") {
    // Rise to a peak, long slow decline, then a sharp drop around t = 80.
    std::vector<double> t, r;
    for (int k = 0; k <= 1000; ++k) {
        const double x = 0.1 * k;
        t.push_back(x);
        r.push_back((2.0 + 0.5 * x * std::exp(-x) - 0.002 * x) / (1.0 + std::exp(x - 80.0)));
    }
    const auto plan = plan_snapshots(t, r, {0.9, 0.5, 0.1});
    CHECK(t[plan.plateau_index] > 5.0);
    CHECK(t[plan.plateau_index] < 75.0);
    REQUIRE(plan.indices.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const double f = std::vector<double>{0.9, 0.5, 0.1}[i];
        CHECK(r[plan.indices[i]] <= f * plan.plateau);
        CHECK(r[plan.indices[i] - 1] > f * plan.plateau);
    }
    CHECK(kind_of([&] { plan_snapshots(t, r, {0.0}); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("manifest round trip reproduces the artifacts") {
    const auto a = scratch("run_a");
    const auto b = scratch("run_b");
    const auto first = run_command("simulate", quick_run(), a);
    CHECK(first["verdict"] == "unsynchronised");

    Settings again = Settings::defaults();
    again.merge_file((a / "manifest.json").string());
    CHECK(again.raw("nmax") != "auto");
    run_command("simulate", again, b);
    for (const char* f : {"trajectory.csv", "final_number.csv", "final_phase.csv", "result.json"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["seedless"] == true);
    CHECK(manifest["command"] == "simulate");
}

TEST_CASE("bad settings fail before any artifact is written") {
    const auto dir = scratch("bad");
    Settings s = quick_run();
    s.set("dt", "-1");
    CHECK(kind_of([&] { run_command("simulate", s, dir); }) == ErrorKind::InvalidConfig);
    CHECK_FALSE(fs::exists(dir / "manifest.json"));
    CHECK(kind_of([&] { run_command("transmogrify", quick_run(), dir); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("classical fixed points") {
    Settings s = Settings::defaults();
    s.set("classical_mode", "fixed_points");
    s.set("epsilon", "2");
    const auto j = run_command("classical", s, scratch("classical"));
    REQUIRE(j["points"].size() == 3);
    CHECK(j["points"][0]["r"] == 0.0);
    CHECK(j["points"][1]["stability"] == "unstable");
    CHECK(j["points"][2]["stability"] == "stable");
    CHECK(j["epsilon_c"].get<double>() == doctest::Approx(1.0));
    CHECK(j["points"][1]["r"].get<double>() == doctest::Approx(0.1464).epsilon(1e-3));
}

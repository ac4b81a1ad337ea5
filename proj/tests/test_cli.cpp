// End-to-end tests of the command-line driver: every subcommand is exercised
// as a subprocess and judged on exit code, emitted files, and printed output.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd;
    if (!env_prefix.empty()) cmd += "env " + env_prefix + " ";
    cmd += std::string(GEOPHASE_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("geophase_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

// Parsed numeric CSV: header row of names, then rows of doubles.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream lines(text);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string cell;
        if (first) {
            while (std::getline(cells, cell, ',')) csv.header.push_back(cell);
            first = false;
            continue;
        }
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        csv.rows.push_back(row);
    }
    return csv;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

const double kCapAngleR1 = 1.7061381326424512;    // pi * (cosh 1 - 1)
const double kCapAngleR05 = 0.40094879469967243;  // pi * (cosh 0.5 - 1)

}  // namespace

TEST_CASE("curvature command emits matching dual-route tables") {
    const fs::path dir = fresh_dir("curvature");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "hbar": 1.0,
        "levels": [0],
        "points": [[1.0, 0.0, 1.0], [1.3, 0.2, 0.9]],
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("curvature --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(out / "resolved_config.json"));
    REQUIRE(fs::exists(out / "curvature_hilbert.csv"));
    REQUIRE(fs::exists(out / "curvature_phasespace.csv"));
    REQUIRE(fs::exists(out / "curvature_diff.csv"));

    const std::string hilbert_text = slurp(out / "curvature_hilbert.csv");
    CHECK(hilbert_text.find('\r') == std::string::npos);  // LF line endings
    CHECK(hilbert_text.back() == '\n');

    const Csv hilbert = parse_csv(hilbert_text);
    const Csv phasespace = parse_csv(slurp(out / "curvature_phasespace.csv"));
    const Csv diff = parse_csv(slurp(out / "curvature_diff.csv"));
    const std::vector<std::string> want_header = {"X", "Y", "Z", "F_YZ", "F_ZX", "F_XY"};
    CHECK(hilbert.header == want_header);
    CHECK(phasespace.header == want_header);
    CHECK(diff.header == want_header);
    REQUIRE(hilbert.rows.size() == 2);
    REQUIRE(phasespace.rows.size() == 2);

    // At (1,0,1), level 0: curvature = (1/8) * (X, Y, Z).
    CHECK(std::abs(hilbert.rows[0][3] - 0.125) <= 1e-3);
    CHECK(std::abs(phasespace.rows[0][3] - 0.125) <= 1e-6);
    CHECK(std::abs(phasespace.rows[0][4]) <= 1e-6);
    CHECK(std::abs(phasespace.rows[0][5] - 0.125) <= 1e-6);
    for (const std::vector<double>& row : diff.rows) {
        for (int c = 3; c < 6; ++c) CHECK(std::abs(row[c]) < 2e-3);
    }
}

TEST_CASE("curvature rejects a point outside the elliptic domain with exit 3") {
    const fs::path dir = fresh_dir("domain");
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [0],
        "points": [[1.0, 2.0, 1.0]],
        "output_dir": ")" + (dir / "out").string() + R"("
    })");
    const RunResult r = run_cli("curvature --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("(1, 2, 1)") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 1 and a diagnostic") {
    const fs::path dir = fresh_dir("config_errors");

    SUBCASE("unknown key is named") {
        write_file(dir / "bad.json", R"({"system": "oscillator", "levels": [0], "frobnicate": 3})");
        const RunResult r = run_cli("curvature --config " + (dir / "bad.json").string());
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("frobnicate") != std::string::npos);
    }
    SUBCASE("empty level list") {
        write_file(dir / "bad.json", R"({"system": "oscillator", "levels": []})");
        const RunResult r = run_cli("curvature --config " + (dir / "bad.json").string());
        CHECK(r.exit_code == 1);
    }
    SUBCASE("non-positive hbar") {
        write_file(dir / "bad.json", R"({"system": "oscillator", "levels": [0], "hbar": -1.0})");
        const RunResult r = run_cli("curvature --config " + (dir / "bad.json").string());
        CHECK(r.exit_code == 1);
    }
    SUBCASE("missing config file") {
        const RunResult r = run_cli("phase --config " + (dir / "nope.json").string());
        CHECK(r.exit_code == 1);
    }
    SUBCASE("rejected thread count") {
        const RunResult r = run_cli("selftest --threads 0");
        CHECK(r.exit_code == 1);
    }
    SUBCASE("missing subcommand") {
        const RunResult r = run_cli("");
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("phase command reports all routes on the standard closed circuit") {
    const fs::path dir = fresh_dir("phase");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "hbar": 1.0,
        "levels": [0],
        "circuit": {"type": "cap", "omega0": 1.0, "r": 1.0},
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("phase --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(out / "resolved_config.json"));
    const json report = slurp_json(out / "phase_report.json");
    REQUIRE(report.contains("levels"));
    REQUIRE(report["levels"].size() == 1);
    const json& level = report["levels"][0];
    const double gamma_closed = -0.5 * kCapAngleR1;
    CHECK(std::abs(level["gamma_q"]["raw"].get<double>() - gamma_closed) < 2e-3);
    CHECK(std::abs(level["gamma_ps"]["raw"].get<double>() - gamma_closed) < 1e-6);
    CHECK(std::abs(level["hannay"].get<double>() - kCapAngleR1) < 1e-4);
    CHECK(level["dynamical_phase"].get<double>() == 0.0);
    CHECK(level["diagnostics"]["quadrature_residual"].get<double>() < 1e-8);
    CHECK(level["diagnostics"]["gauge_redress_delta"].get<double>() < 1e-9);
    CHECK(report.contains("conventions"));
    CHECK(!report.contains("mixed_phase"));
    CHECK(!report.contains("wz_holonomy"));
}

TEST_CASE("phase command: mixture and multi-level holonomy blocks") {
    const fs::path dir = fresh_dir("phase_extras");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [0],
        "circuit": {"type": "cap", "omega0": 1.0, "r": 1.0, "samples": 512},
        "mixture_weights": [0.6, 0.3, 0.1],
        "wz_levels": [0, 1],
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("phase --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);
    const json report = slurp_json(out / "phase_report.json");

    // Mean action index is exactly 1, so the statistical phase equals the
    // (r = 1) cap angle.
    REQUIRE(report.contains("mixed_phase"));
    CHECK(std::abs(report["mixed_phase"].get<double>() - kCapAngleR1) < 1e-6);

    // The holonomy of distinct oscillator levels stays diagonal (parity), with
    // diagonal phases equal to the level phases.
    REQUIRE(report.contains("wz_holonomy"));
    const json& W = report["wz_holonomy"];
    REQUIRE(W.size() == 2);
    CHECK(std::abs(W[0][1][0].get<double>()) < 1e-12);
    CHECK(std::abs(W[0][1][1].get<double>()) < 1e-12);
    const double mag00 = std::hypot(W[0][0][0].get<double>(), W[0][0][1].get<double>());
    CHECK(std::abs(mag00 - 1.0) < 1e-10);
    const double arg00 = std::atan2(W[0][0][1].get<double>(), W[0][0][0].get<double>());
    CHECK(std::abs(arg00 - (-0.5 * kCapAngleR1)) < 1e-3);
}

TEST_CASE("phase command: planar circuits and degenerate surfaces give zero") {
    const fs::path dir = fresh_dir("phase_zero");

    SUBCASE("Y = 0 planar circuit") {
        const fs::path out = dir / "planar";
        write_file(dir / "planar.json", R"({
            "system": "oscillator",
            "levels": [0],
            "circuit": {"type": "planar", "x0": 2.0, "z0": 2.0, "radius": 0.5},
            "output_dir": ")" + out.string() + R"("
        })");
        const RunResult r = run_cli("phase --config " + (dir / "planar.json").string());
        CHECK(r.exit_code == 0);
        const json level = slurp_json(out / "phase_report.json")["levels"][0];
        CHECK(std::abs(level["gamma_q"]["raw"].get<double>()) <= 1e-6);
        CHECK(std::abs(level["gamma_ps"]["raw"].get<double>()) <= 1e-6);
        CHECK(std::abs(level["hannay"].get<double>()) <= 1e-6);
    }
    SUBCASE("radius-zero cap") {
        const fs::path out = dir / "point";
        write_file(dir / "point.json", R"({
            "system": "oscillator",
            "levels": [0],
            "circuit": {"type": "cap", "omega0": 1.0, "r": 0.0},
            "output_dir": ")" + out.string() + R"("
        })");
        const RunResult r = run_cli("phase --config " + (dir / "point.json").string());
        CHECK(r.exit_code == 0);
        const json level = slurp_json(out / "phase_report.json")["levels"][0];
        CHECK(std::abs(level["gamma_q"]["raw"].get<double>()) <= 1e-12);
        CHECK(std::abs(level["gamma_ps"]["raw"].get<double>()) <= 1e-12);
        CHECK(std::abs(level["hannay"].get<double>()) <= 1e-12);
    }
}

TEST_CASE("wigner command rasters the first excited state") {
    const fs::path dir = fresh_dir("wigner");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "hbar": 1.0,
        "levels": [1],
        "points": [[1.0, 0.0, 1.0]],
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("wigner --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);

    const Csv qp = parse_csv(slurp(out / "wigner_qp.csv"));
    REQUIRE(qp.header == std::vector<std::string>{"q", "p", "W"});
    const double want_origin = -1.0 / M_PI;
    bool found_origin = false;
    for (const std::vector<double>& row : qp.rows) {
        if (row[0] == 0.0 && row[1] == 0.0) {
            found_origin = true;
            CHECK(std::abs(row[2] - want_origin) < 1e-6);
        }
    }
    CHECK(found_origin);

    const Csv radial = parse_csv(slurp(out / "wigner_radial.csv"));
    REQUIRE(radial.header == std::vector<std::string>{"I", "W"});
    CHECK(radial.rows.front()[0] == 0.0);
    CHECK(std::abs(radial.rows.front()[1] - want_origin) < 1e-9);
}

TEST_CASE("hannay command: three routes agree on the half-width cap") {
    const fs::path dir = fresh_dir("hannay");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [2],
        "circuit": {"type": "cap", "omega0": 1.0, "r": 0.5},
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("hannay --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);
    const json level = slurp_json(out / "hannay_report.json")["levels"][0];
    CHECK(std::abs(level["hannay"].get<double>() - kCapAngleR05) < 1e-4);
    CHECK(std::abs(level["level_difference"].get<double>() - kCapAngleR05) < 1e-4);
    CHECK(std::abs(level["action_slope"].get<double>() - kCapAngleR05) < 1e-4);
    CHECK(level["spread"].get<double>() < 1e-6);
}

TEST_CASE("verify command: slower schedules drive the phase to the reference") {
    const fs::path dir = fresh_dir("verify");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [0],
        "circuit": {"type": "cap", "omega0": 1.0, "r": 1.0},
        "grid": {"auto": false, "q_min": -13.0, "q_max": 13.0, "n_points": 128},
        "schedule": {"total_time": 20.0, "time_steps": 400, "profile": "smooth",
                     "times": [20.0, 40.0, 80.0]},
        "output_dir": ")" + out.string() + R"("
    })");
    const RunResult r = run_cli("verify --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 0);

    const Csv conv = parse_csv(slurp(out / "convergence.csv"));
    REQUIRE(conv.header == std::vector<std::string>{"total_time", "leakage", "gamma", "error"});
    REQUIRE(conv.rows.size() == 3);
    CHECK(conv.rows[0][3] > conv.rows[1][3]);
    CHECK(conv.rows[1][3] > conv.rows[2][3]);
    for (const std::vector<double>& row : conv.rows) CHECK(row[1] < 1e-3);

    const json report = slurp_json(out / "verify_report.json");
    const double slope = report["slope"].get<double>();
    CHECK(slope > -1.3);
    CHECK(slope < -0.7);
    CHECK(std::abs(report["gamma_reference"].get<double>() - (-0.5 * kCapAngleR1)) < 2e-3);
    CHECK(report["classical"]["max_action_drift"].get<double>() < 1e-2);
}

TEST_CASE("verify command: a too-fast schedule fails with exit 2") {
    const fs::path dir = fresh_dir("verify_fast");
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [0],
        "circuit": {"type": "cap", "omega0": 1.0, "r": 1.0},
        "grid": {"auto": false, "q_min": -13.0, "q_max": 13.0, "n_points": 128},
        "schedule": {"total_time": 10.0, "time_steps": 200, "profile": "linear",
                     "times": [10.0]},
        "output_dir": ")" + (dir / "out").string() + R"("
    })");
    const RunResult r = run_cli("verify --config " + (dir / "config.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("leakage") != std::string::npos);
}

TEST_CASE("selftest prints one PASS line per golden check and exits 0") {
    const RunResult r = run_cli("selftest");
    CHECK(r.exit_code == 0);
    CHECK(count_occurrences(r.output, "PASS  ") >= 8);
    CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("identical configuration and seed produce byte-identical outputs") {
    const fs::path dir = fresh_dir("determinism");
    const fs::path out = dir / "out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [0],
        "circuit": {"type": "planar", "x0": 2.0, "z0": 2.0, "radius": 0.5, "samples": 64},
        "seed": 7,
        "output_dir": ")" + out.string() + R"("
    })");
    const std::string cmd = "phase --config " + (dir / "config.json").string();
    REQUIRE(run_cli(cmd).exit_code == 0);
    const std::string report_1 = slurp(out / "phase_report.json");
    const std::string resolved_1 = slurp(out / "resolved_config.json");
    REQUIRE(run_cli(cmd).exit_code == 0);
    CHECK(slurp(out / "phase_report.json") == report_1);
    CHECK(slurp(out / "resolved_config.json") == resolved_1);

    SUBCASE("thread cap does not change the bytes") {
        REQUIRE(run_cli(cmd + " --threads 4").exit_code == 0);
        CHECK(slurp(out / "phase_report.json") == report_1);
    }
    SUBCASE("the resolved configuration reproduces the run") {
        const fs::path out2 = dir / "out2";
        REQUIRE(run_cli("phase --config " + (out / "resolved_config.json").string() +
                        " --out " + out2.string())
                    .exit_code == 0);
        CHECK(slurp(out2 / "phase_report.json") == report_1);
    }
}

TEST_CASE("environment variables feed flags, and explicit flags win") {
    const fs::path dir = fresh_dir("env");
    const fs::path out_env = dir / "env_out";
    const fs::path out_flag = dir / "flag_out";
    write_file(dir / "config.json", R"({
        "system": "oscillator",
        "levels": [1],
        "points": [[1.0, 0.0, 1.0]],
        "output_dir": ")" + (dir / "config_out").string() + R"("
    })");

    const RunResult env_run =
        run_cli("wigner", "GEOPHASE_CONFIG=" + (dir / "config.json").string() +
                              " GEOPHASE_OUT=" + out_env.string());
    CHECK(env_run.exit_code == 0);
    CHECK(fs::exists(out_env / "wigner_radial.csv"));

    const RunResult flag_run =
        run_cli("wigner --config " + (dir / "config.json").string() + " --out " +
                    out_flag.string(),
                "GEOPHASE_OUT=" + (dir / "env_ignored").string());
    CHECK(flag_run.exit_code == 0);
    CHECK(fs::exists(out_flag / "wigner_radial.csv"));
    CHECK(!fs::exists(dir / "env_ignored"));
}

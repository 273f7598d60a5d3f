#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pwmstab/app.hpp"
#include "pwmstab/report.hpp"
#include "pwmstab/verify.hpp"

using namespace pwmstab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pwmstab_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string write_config(const TempDir& dir, const std::string& name,
                         const std::string& body) {
    const std::string path = (dir.path / name).string();
    write_file(path, body);
    return path;
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

const char* kStableBuck = R"(converter.topology = buck
converter.inductance_L = 50e-6
converter.capacitance_C = 100e-6
converter.load_R = 5.0
converter.source_vs = 12.0
converter.period_T = 20e-6
control.i_c = 1.54
)";

const char* kUnstableBuck = R"(converter.topology = buck
converter.inductance_L = 50e-6
converter.capacitance_C = 100e-6
converter.load_R = 5.0
converter.source_vs = 12.0
converter.period_T = 20e-6
control.i_c = 2.0
)";

} // namespace

TEST_CASE("cli: analyze stable buck exits 0 and writes the report") {
    TempDir dir("analyze_stable");
    const std::string cfg = write_config(dir, "buck.cfg", kStableBuck);
    std::string out;
    const int code = run({"analyze", cfg, "--out-dir", dir.str()}, &out);
    CHECK(code == exit_ok);
    CHECK(out.find("verdict: stable") != std::string::npos);

    const auto lines = csv_lines(read_all(dir.str() + "/analyze.csv"));
    REQUIRE(lines.size() == 2);
    const auto header = split(lines[0]);
    const auto row = split(lines[1]);
    REQUIRE(header.size() == row.size());
    // all three criteria agree "stable": holds flags are 1
    for (const char* col : {"nc_holds", "slope_holds_inst", "slope_holds_lin"}) {
        size_t idx = 0;
        while (idx < header.size() && header[idx] != col) ++idx;
        REQUIRE(idx < header.size());
        CHECK(row[idx] == "1");
    }
}

TEST_CASE("cli: no-ramp duty above one half exits 2 with ratio above 1") {
    TempDir dir("analyze_unstable");
    const std::string cfg = write_config(dir, "buck.cfg", kUnstableBuck);
    std::string out;
    const int code = run({"analyze", cfg, "--out-dir", dir.str()}, &out);
    CHECK(code == exit_unstable);

    const auto lines = csv_lines(read_all(dir.str() + "/analyze.csv"));
    const auto header = split(lines[0]);
    const auto row = split(lines[1]);
    size_t idx = 0;
    while (idx < header.size() && header[idx] != "slope_ratio_inst") ++idx;
    REQUIRE(idx < header.size());
    CHECK(std::stod(row[idx]) > 1.0);
}

TEST_CASE("cli: analyze warns when a sweep section is present") {
    TempDir dir("analyze_warn");
    const std::string cfg = write_config(
        dir, "buck.cfg",
        std::string(kStableBuck) +
            "sweep.param = m_c\nsweep.lo = 0\nsweep.hi = 1\nsweep.points = 2\n");
    std::string out, err;
    const int code = run({"analyze", cfg, "--out-dir", dir.str()}, &out, &err);
    CHECK(code == exit_ok);
    CHECK(err.find("ignored") != std::string::npos);
}

TEST_CASE("cli: minimal two-point sweep produces exactly two rows") {
    TempDir dir("sweep_min");
    const std::string cfg = write_config(
        dir, "sweep.cfg",
        std::string(kStableBuck) + "sweep.param = i_c\nsweep.lo = 1.4\n"
                                   "sweep.hi = 1.6\nsweep.points = 2\n");
    const int code = run({"sweep", cfg, "--out-dir", dir.str()});
    CHECK(code == exit_ok);
    const auto lines = csv_lines(read_all(dir.str() + "/sweep.csv"));
    CHECK(lines.size() == 3); // header + 2 points

    // entirely stable range: every boundary absent
    const auto blines = csv_lines(read_all(dir.str() + "/boundaries.csv"));
    REQUIRE(blines.size() == 5);
    for (size_t i = 1; i < blines.size(); ++i) {
        const auto cells = split(blines[i]);
        CHECK(cells[1] == "0");
        CHECK(cells[2] == "absent");
    }
}

TEST_CASE("cli: sweep without a sweep section is a usage error") {
    TempDir dir("sweep_missing");
    const std::string cfg = write_config(dir, "buck.cfg", kStableBuck);
    std::string out, err;
    CHECK(run({"sweep", cfg, "--out-dir", dir.str()}, &out, &err) ==
          exit_usage);
}

TEST_CASE("cli: svg output is emitted on request and is well-formed") {
    TempDir dir("sweep_svg");
    const std::string cfg = write_config(
        dir, "sweep.cfg",
        std::string(kUnstableBuck) + "sweep.param = m_c\nsweep.lo = 0\n"
                                     "sweep.hi = 20000\nsweep.points = 9\n");
    const int code =
        run({"sweep", cfg, "--out-dir", dir.str(), "--format", "csv+svg"});
    CHECK(code == exit_ok);
    const std::string svg = read_all(dir.str() + "/sweep.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("cli: simulate one cycle from the orbit closes on itself") {
    TempDir dir("sim_one");
    const std::string cfg = write_config(dir, "buck.cfg", kStableBuck);
    const int code =
        run({"simulate", cfg, "--cycles", "1", "--out-dir", dir.str()});
    CHECK(code == exit_ok);
    const auto lines = csv_lines(read_all(dir.str() + "/samples.csv"));
    REQUIRE(lines.size() == 3); // header + cycle 0 + closing row
    const auto first = split(lines[1]);
    const auto last = split(lines[2]);
    const double i0 = std::stod(first[1]), i1 = std::stod(last[1]);
    const double v0 = std::stod(first[2]), v1 = std::stod(last[2]);
    CHECK(std::abs(i1 - i0) <= 1e-8 * (1.0 + std::abs(i0)));
    CHECK(std::abs(v1 - v0) <= 1e-8 * (1.0 + std::abs(v0)));

    const auto wave = csv_lines(read_all(dir.str() + "/waveform.csv"));
    CHECK(wave.size() == 1 + 128);
}

TEST_CASE("cli: simulate past the flip settles into two clusters") {
    TempDir dir("sim_flip");
    const std::string cfg = write_config(dir, "buck.cfg", kUnstableBuck);
    const int code =
        run({"simulate", cfg, "--cycles", "300", "--out-dir", dir.str()});
    CHECK(code == exit_ok);
    const auto lines = csv_lines(read_all(dir.str() + "/samples.csv"));
    REQUIRE(lines.size() >= 300);

    // tail currents alternate between two values
    std::vector<double> tail;
    for (size_t k = lines.size() - 17; k < lines.size() - 1; ++k)
        tail.push_back(std::stod(split(lines[k])[1]));
    double even_spread = 0.0, odd_spread = 0.0, gap = 0.0;
    for (size_t k = 0; k + 2 < tail.size(); k += 2)
        even_spread = std::max(even_spread, std::abs(tail[k + 2] - tail[k]));
    for (size_t k = 1; k + 2 < tail.size(); k += 2)
        odd_spread = std::max(odd_spread, std::abs(tail[k + 2] - tail[k]));
    for (size_t k = 0; k + 1 < tail.size(); ++k)
        gap += std::abs(tail[k + 1] - tail[k]) / (tail.size() - 1);
    CHECK(gap > 1e-3);
    CHECK(even_spread < 0.05 * gap);
    CHECK(odd_spread < 0.05 * gap);
}

TEST_CASE("cli: simulate rejects a non-positive cycle count") {
    TempDir dir("sim_zero");
    const std::string cfg = write_config(dir, "buck.cfg", kStableBuck);
    CHECK(run({"simulate", cfg, "--cycles", "0", "--out-dir", dir.str()}) ==
          exit_usage);
}

TEST_CASE("cli: orbit failure exits 4") {
    TempDir dir("analyze_fail");
    // command far above any reachable peak current: no period-1 orbit
    std::string body(kStableBuck);
    body.replace(body.find("control.i_c = 1.54"), 18, "control.i_c = 100\n");
    const std::string cfg = write_config(dir, "bad.cfg", body);
    std::string out, err;
    const int code = run({"analyze", cfg, "--out-dir", dir.str()}, &out, &err);
    CHECK(code == exit_solver_failure);
    CHECK(err.find("orbit") != std::string::npos);
}

TEST_CASE("cli: usage and config errors exit 64") {
    TempDir dir("usage");
    CHECK(run({"frobnicate"}) == exit_usage);
    CHECK(run({"analyze"}) == exit_usage);
    CHECK(run({"analyze", dir.str() + "/nope.cfg"}) == exit_usage);
    const std::string bad =
        write_config(dir, "bad.cfg", "converter.unknown = 1\n");
    CHECK(run({"analyze", bad}) == exit_usage);
}

TEST_CASE("cli: verify passes on the corpus and reports counts") {
    std::string out;
    const int code = run({"verify"}, &out);
    CHECK(code == exit_ok);
    CHECK(out.find("checks passed") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: verify with a loosened tolerance keeps the same pass set") {
    const VerifySummary strict = run_verification(std::nullopt, 1.0);
    const VerifySummary loose = run_verification(std::nullopt, 10.0);
    REQUIRE(strict.checks.size() == loose.checks.size());
    CHECK(strict.all_pass);
    CHECK(loose.all_pass);
    for (size_t i = 0; i < strict.checks.size(); ++i)
        CHECK(strict.checks[i].pass == loose.checks[i].pass);
}

TEST_CASE("fault injection: corrupted saltation sign fails loudly") {
    VerifyHooks hooks;
    hooks.corrupt_saltation_sign = true;
    const VerifySummary summary = run_verification(std::nullopt, 1.0, hooks);
    CHECK(!summary.all_pass);
    bool rank1_failed = false, det_failed = false;
    for (const CheckResult& c : summary.checks) {
        if (c.check == "saltation_rank1_det" && !c.pass) rank1_failed = true;
        if (c.check == "det_trace_identity" && !c.pass) det_failed = true;
    }
    CHECK(rank1_failed);
    CHECK(det_failed);
}

TEST_CASE("cli: analyze output matches the golden file for the shipped buck") {
    TempDir dir("golden");
    const std::string src = PWMSTAB_SOURCE_DIR;
    REQUIRE(run({"analyze", src + "/configs/buck.cfg", "--out-dir",
                 dir.str()}) == exit_ok);
    CHECK(read_all(dir.str() + "/analyze.csv") ==
          read_all(src + "/tests/golden/analyze_buck_ideal.csv"));
}

TEST_CASE("cli: repeated runs produce byte-identical outputs") {
    TempDir dir("determinism");
    const std::string cfg = write_config(dir, "buck.cfg", kStableBuck);
    REQUIRE(run({"analyze", cfg, "--out-dir", dir.str() + "/a"}) == exit_ok);
    REQUIRE(run({"analyze", cfg, "--out-dir", dir.str() + "/b"}) == exit_ok);
    CHECK(read_all(dir.str() + "/a/analyze.csv") ==
          read_all(dir.str() + "/b/analyze.csv"));
}

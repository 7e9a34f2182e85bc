#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsyk/config.hpp"
#include "bsyk/report_schema.hpp"
#include "bsyk/series_io.hpp"

namespace fs = std::filesystem;
using namespace bsyk;
using nlohmann::json;

namespace {

fs::path temp_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("bsyk_test_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const fs::path out = fs::temp_directory_path() / "bsyk_cli_output.txt";
    const std::string cmd = std::string(BSYK_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) *output = slurp(out);
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config: key=value and JSON forms parse to the same effective config") {
    std::vector<std::string> missing;
    const SimConfig a = parse_config_text(
        "# comment\nN = 3\ngamma = 0.05\nt_max = 1.0\nn_traj = 7\nJ=1.0\nmaster_seed = 42\n",
        missing);
    CHECK(missing.empty());
    const SimConfig b = parse_config_text(
        R"({"N": 3, "gamma": 0.05, "t_max": 1.0, "n_traj": 7, "J": 1.0, "master_seed": 42})",
        missing);
    CHECK(missing.empty());
    CHECK(a.canonical_json() == b.canonical_json());
    CHECK(a.hash() == b.hash());
    CHECK(a.n_modes == 3);
    CHECK(a.dt == doctest::Approx(0.01));  // default dt = 0.01/J
}

TEST_CASE("config hash is stable under key reordering") {
    std::vector<std::string> m1, m2;
    const SimConfig a =
        parse_config_text(R"({"gamma": 0.05, "N": 2, "n_traj": 5, "t_max": 1.0})", m1);
    const SimConfig b =
        parse_config_text(R"({"t_max": 1.0, "n_traj": 5, "N": 2, "gamma": 0.05})", m2);
    CHECK(a.hash() == b.hash());
}

TEST_CASE("config validation catches the documented failure modes") {
    std::vector<std::string> missing;
    SimConfig c = parse_config_text(R"({"N": 2, "gamma": 0.05, "t_max": 1.0, "n_traj": 4})", missing);
    CHECK(c.validate().empty());
    c.dt = 0.2;  // J dt = 0.2 > 0.05
    auto errs = c.validate();
    CHECK(!errs.empty());
    c.dt = 0.01;
    c.checkpoints = {0.0037};
    errs = c.validate();
    CHECK(!errs.empty());

    missing.clear();
    parse_config_text(R"({"N": 2, "t_max": 1.0, "n_traj": 4})", missing);
    REQUIRE(missing.size() == 1);
    CHECK(missing[0] == "gamma");

    CHECK_THROWS(parse_config_text(R"({"N": 2, "gamma": 0.05, "bogus_key": 1})", missing));
}

TEST_CASE("environment variables override config keys") {
    setenv("BSYK_GAMMA", "0.125", 1);
    std::vector<std::string> missing;
    const SimConfig c =
        parse_config_text(R"({"N": 2, "gamma": 0.05, "t_max": 1.0, "n_traj": 4})", missing);
    unsetenv("BSYK_GAMMA");
    CHECK(c.gamma == doctest::Approx(0.125));
}

TEST_CASE("series CSV round-trips and is byte-stable") {
    const fs::path dir = temp_dir("series");
    ObservableSeries s;
    s.name = "demo";
    s.convention = "annealed";
    s.config_hash = "deadbeef";
    s.times = {0.0, 0.5, 1.0};
    s.mean = {0.1234567890123456789, -3.5e-11, 2.0};
    s.stderr_ = {0.01, 0.0, 1e-300};
    write_series_csv(s, (dir / "demo.csv").string());
    const ObservableSeries r = read_series_csv((dir / "demo.csv").string());
    CHECK(r.name == "demo");
    CHECK(r.config_hash == "deadbeef");
    REQUIRE(r.times.size() == 3);
    for (size_t k = 0; k < 3; ++k) {
        CHECK(r.times[k] == s.times[k]);
        CHECK(r.mean[k] == s.mean[k]);
        CHECK(r.stderr_[k] == s.stderr_[k]);
    }
    write_series_csv(s, (dir / "demo2.csv").string());
    CHECK(slurp(dir / "demo.csv") == slurp(dir / "demo2.csv"));
}

TEST_CASE("snapshot binary round-trips") {
    const fs::path dir = temp_dir("snap");
    Matrix m(2, 2);
    m << Complex(1.0, -2.0), Complex(0.5, 0.0), Complex(0.0, 3.25), Complex(-1.0, 1e-30);
    write_snapshot(m, (dir / "x.bin").string(), 2.5, 7, 99);
    const Matrix r = read_snapshot((dir / "x.bin").string());
    CHECK((r - m).cwiseAbs().maxCoeff() == 0.0);
    const json side = json::parse(slurp(dir / "x.bin.json"));
    CHECK(side["t"] == 2.5);
    CHECK(side["traj_index"] == 7);
    CHECK(side["master_seed"] == 99);
}

TEST_CASE("schema validator flags missing keys and type errors") {
    const char* schema = R"({"type":"object","required":["a"],"properties":{"a":{"type":"number"}}})";
    CHECK(validate_against_schema(R"({"a": 1.5})", schema).empty());
    CHECK(!validate_against_schema(R"({})", schema).empty());
    CHECK(!validate_against_schema(R"({"a": "x"})", schema).empty());
    // the published compare-report schema is itself valid JSON
    CHECK_NOTHROW(json::parse(kCompareReportSchema));
}

TEST_CASE("embedded report schema matches the published file") {
    const fs::path repo_schema = fs::path(__FILE__).parent_path().parent_path() / "schemas" /
                                 "compare_report.schema.json";
    REQUIRE(fs::exists(repo_schema));
    CHECK(json::parse(slurp(repo_schema)) == json::parse(kCompareReportSchema));
}

TEST_CASE("cli: smoke run emits all declared files, reruns are byte-identical") {
    const fs::path dir = temp_dir("cli_smoke");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"N": 2, "gamma": 0.1, "t_max": 0.4, "n_traj": 10,
                              "dt": 0.02, "checkpoint_count": 3, "master_seed": 9,
                              "snapshots": "all"})";
    std::string out;
    const int rc = run_cli("simulate --config " + cfg.string() + " --out " + (dir / "runA").string(), &out);
    REQUIRE(rc == 0);

    const json manifest = json::parse(slurp(dir / "runA" / "manifest.json"));
    for (const auto& rel : manifest["outputs"]) {
        const fs::path p = rel.get<std::string>();
        CAPTURE(p.string());
        CHECK(fs::exists(p));
    }
    CHECK(fs::exists(dir / "runA" / "C.csv"));
    CHECK(fs::exists(dir / "runA" / "F1.csv"));
    CHECK(fs::exists(dir / "runA" / "F2.csv"));
    CHECK(fs::exists(dir / "runA" / "S2_annealed.csv"));
    CHECK(fs::exists(dir / "runA" / "S2_quenched.csv"));
    CHECK(fs::exists(dir / "runA" / "SvN.csv"));
    CHECK(fs::exists(dir / "runA" / "leakage.csv"));
    CHECK(fs::exists(dir / "runA" / "snapshots"));

    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "runB").string()) == 0);
    for (const char* name : {"C.csv", "F1.csv", "F2.csv", "S2_annealed.csv", "S2_quenched.csv",
                             "SvN.csv", "leakage.csv"})
        CHECK(slurp(dir / "runA" / name) == slurp(dir / "runB" / name));

    // thread-count independence of the emitted CSVs
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --threads 4 --out " +
                    (dir / "runC").string()) == 0);
    CHECK(slurp(dir / "runA" / "S2_annealed.csv") == slurp(dir / "runC" / "S2_annealed.csv"));
    CHECK(slurp(dir / "runA" / "C.csv") == slurp(dir / "runC" / "C.csv"));
}

TEST_CASE("cli: missing gamma exits 2 naming the key") {
    const fs::path dir = temp_dir("cli_missing");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"N": 2, "t_max": 0.4, "n_traj": 2})";
    std::string out;
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "run").string(), &out) == 2);
    CHECK(out.find("gamma") != std::string::npos);
}

TEST_CASE("cli: saddle grid, compare, steady round trip") {
    const fs::path dir = temp_dir("cli_saddle");
    const fs::path grid = dir / "grid.json";
    std::ofstream(grid) << R"({"n": [1, 2], "gamma": [0.1], "J": 1.0,
                               "t": {"max": 60.0, "count": 61}})";
    std::string out;
    REQUIRE(run_cli("saddle --grid " + grid.string() + " --out " + (dir / "saddle").string(), &out) == 0);
    REQUIRE(fs::exists(dir / "saddle" / "saddle_grid.csv"));
    CHECK(fs::exists(dir / "saddle" / "saddle_curves.csv"));
    CHECK(fs::exists(dir / "saddle" / "plots.gp"));
    CHECK(fs::exists(dir / "saddle" / "saddle_n2_g0.1.svg"));

    // n=2, gamma=0.1: F column is 0 before the Page time 27.7259 and 0.25 after
    {
        std::ifstream f(dir / "saddle" / "saddle_curves.csv");
        std::string line;
        bool checked_early = false, checked_late = false;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
            std::stringstream ss(line);
            std::string tok;
            std::vector<std::string> cols;
            while (std::getline(ss, tok, ',')) cols.push_back(tok);
            if (std::stod(cols[0]) != 2.0) continue;
            const double t = std::stod(cols[4]);
            const double fval = std::stod(cols[6]);
            if (t < 27.7) {
                CHECK(fval == 0.0);
                checked_early = true;
            }
            if (t > 27.8) {
                CHECK(fval == 0.25);
                checked_late = true;
            }
        }
        CHECK(checked_early);
        CHECK(checked_late);
    }

    // empty grid -> exit 2
    const fs::path empty = dir / "empty.json";
    std::ofstream(empty) << R"({"n": [], "gamma": [0.1]})";
    CHECK(run_cli("saddle --grid " + empty.string() + " --out " + (dir / "saddle2").string()) == 2);

    // a short sim run to compare against
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"N": 2, "gamma": 0.1, "t_max": 1.0, "n_traj": 8, "dt": 0.02,
                              "checkpoint_count": 3, "master_seed": 4})";
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "sim").string()) == 0);
    REQUIRE(run_cli("compare --sim " + (dir / "sim").string() + " --saddle " +
                    (dir / "saddle").string() + " --out " + (dir / "cmp").string(), &out) == 0);
    REQUIRE(fs::exists(dir / "cmp" / "report.json"));
    const json report = json::parse(slurp(dir / "cmp" / "report.json"));
    CHECK(validate_against_schema(report.dump(), kCompareReportSchema).empty());
    CHECK(fs::exists(dir / "cmp" / "overlay_S2_annealed.csv"));

    // mismatched gamma -> exit 2
    const fs::path cfg2 = dir / "cfg2.json";
    std::ofstream(cfg2) << R"({"N": 2, "gamma": 0.07, "t_max": 1.0, "n_traj": 4, "dt": 0.02,
                               "master_seed": 4})";
    REQUIRE(run_cli("simulate --config " + cfg2.string() + " --out " + (dir / "sim2").string()) == 0);
    CHECK(run_cli("compare --sim " + (dir / "sim2").string() + " --saddle " +
                  (dir / "saddle").string() + " --out " + (dir / "cmp2").string(), &out) == 2);
    CHECK(out.find("gamma") != std::string::npos);

    // steady oracle command
    REQUIRE(run_cli("steady --config " + cfg.string() + " --out " + (dir / "steady").string(), &out) == 0);
    const json steady = json::parse(slurp(dir / "steady" / "steady.json"));
    CHECK(steady["S2"].get<double>() == doctest::Approx(2 * 2 * std::log(2.0) - std::log(3.0)).epsilon(1e-6));
}

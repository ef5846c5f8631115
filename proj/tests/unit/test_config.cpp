#include <catch2/catch.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "qexciton/config.hpp"
#include "qexciton/report.hpp"
#include "qexciton/validation.hpp"

using namespace qexciton;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "qexciton_config_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_scratch(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string error_key(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("flag parsing") {
    SECTION("explicit flags equal the fig1 scenario") {
        const RunConfig a =
            parse_config({"--omega", "1562", "--g", "20", "--n-molecules", "100", "--gamma", "0.1", "--excitation", "2"});
        const RunConfig b = parse_config({"--scenario", "fig1"});
        CHECK(a == b);
        CHECK(a.params.omega == 1562.0);
        CHECK(a.params.coupling_g == 20.0);
        CHECK(a.params.n_molecules == 100);
        CHECK(a.params.gamma == 0.1);
        CHECK(a.excitation == 2);
        CHECK(a.initial_state == "exciton");
        CHECK(a.method == Method::first_order);
    }
    SECTION("fig2 differs only in N") {
        const RunConfig c = parse_config({"--scenario", "fig2"});
        CHECK(c.params.n_molecules == 10000);
        CHECK(c.params.coupling_g == 20.0);
        CHECK(c.excitation == 2);
    }
    SECTION("N below 3 is rejected") {
        CHECK_THROWS_WITH(parse_config({"--n-molecules", "2"}), Catch::Contains("N must be >= 3"));
        CHECK(error_key([] { parse_config({"--n-molecules", "2"}); }) == "n_molecules");
    }
    SECTION("each error names its key") {
        CHECK(error_key([] { parse_config({"--omega", "abc"}); }) == "omega");
        CHECK(error_key([] { parse_config({"--omega", "-5"}); }) == "omega");
        CHECK(error_key([] { parse_config({"--gamma", "0"}); }) == "gamma");
        CHECK(error_key([] { parse_config({"--g", "-1"}); }) == "g");
        CHECK(error_key([] { parse_config({"--excitation", "0"}); }) == "excitation");
        CHECK(error_key([] { parse_config({"--excitation", "2.5"}); }) == "excitation");
        CHECK(error_key([] { parse_config({"--method", "zeroth"}); }) == "method");
        CHECK(error_key([] { parse_config({"--format", "xml"}); }) == "format");
        CHECK(error_key([] { parse_config({"--scenario", "fig3"}); }) == "scenario");
        CHECK(error_key([] { parse_config({"--grid-step", "0.05"}); }) == "grid_step");
        CHECK(error_key([] { parse_config({"--grid-min", "1500"}); }) == "grid_min");
        CHECK(error_key([] { parse_config({"--grid-max", "1600"}); }) == "grid_max");
        CHECK(error_key([] { parse_config({"--peak-min-height", "1.5"}); }) == "peak_min_height");
        CHECK(error_key([] { parse_config({"--initial-state", "1,1,0"}); }) == "initial_state");
        CHECK(error_key([] { parse_config({"--initial-state", "1,0"}); }) == "initial_state");
        CHECK(error_key([] { parse_config({"--kappa", "2", "--g", "21"}); }) == "kappa");
        CHECK(error_key([] { parse_config({"--bogus", "1"}); }) == "flags");
    }
    SECTION("kappa fixes g unless g is given") {
        const RunConfig c = parse_config({"--kappa", "2", "--n-molecules", "400"});
        CHECK(c.params.coupling_g == Approx(40.0).epsilon(1e-15));
        CHECK_NOTHROW(parse_config({"--kappa", "2", "--g", "20"}));
    }
    SECTION("explicit amplitudes, real and complex") {
        const RunConfig c = parse_config({"--initial-state", "0.6,0,0:0.8"});
        CHECK(c.initial_state == "explicit");
        REQUIRE(c.amplitudes.size() == 3);
        CHECK(c.amplitudes[2] == cplx(0.0, 0.8));
        CHECK(c.initial().amplitudes.norm() == Approx(1.0));
    }
    SECTION("default grid honours the invariants") {
        for (const auto& args : std::vector<std::vector<std::string>>{
                 {}, {"--scenario", "fig2"}, {"--excitation", "1"}, {"--excitation", "6"}, {"--n-molecules", "10"}}) {
            const RunConfig c = parse_config(args);
            const double reach = 3.0 * c.params.coupling_g + 2.0 * c.params.omega * c.excitation / c.params.n_molecules;
            CHECK(c.grid.step <= c.params.gamma / 5.0);
            CHECK(c.grid.min <= c.params.omega - reach);
            CHECK(c.grid.max >= c.params.omega + reach);
        }
        const RunConfig c = parse_config({});
        CHECK(c.grid.min == Approx(1562.0 - 127.48).epsilon(1e-12));
        CHECK(c.grid.step == Approx(0.01));
    }
    SECTION("output format and report path") {
        const RunConfig a = parse_config({"--output", "out/run.json"});
        CHECK(a.format == OutputFormat::json);
        CHECK(a.report == "out/run.report.json");
        const RunConfig b = parse_config({"--output", "run.v2/table", "--format", "csv"});
        CHECK(b.report == "run.v2/table.report.json");
        CHECK(error_key([] { parse_config({"--output", "x.json", "--report", "x.json"}); }) == "report");
    }
}

TEST_CASE("config files") {
    SECTION("key = value with comments; flags override") {
        const std::string path = write_scratch("run.conf",
                                               "# large-N run\n"
                                               "scenario = fig2\n"
                                               "gamma = 0.2   # wider filter\n"
                                               "\n"
                                               "initial-state = photon\n"
                                               "method = exact_numeric\n");
        const RunConfig c = parse_config({"--config", path, "--gamma", "0.15"});
        CHECK(c.params.n_molecules == 10000);
        CHECK(c.params.gamma == 0.15);
        CHECK(c.initial_state == "photon");
        CHECK(c.method == Method::exact_numeric);
    }
    SECTION("JSON object") {
        const std::string path =
            write_scratch("run.json", R"({"omega": 1500, "g": 10, "n_molecules": 500, "initial_state": [[0, 1], 0, 0]})");
        const RunConfig c = parse_config({"--config", path});
        CHECK(c.params.omega == 1500.0);
        CHECK(c.params.n_molecules == 500);
        CHECK(c.amplitudes[0] == cplx(0.0, 1.0));
    }
    SECTION("unknown keys and malformed lines name the offender") {
        CHECK(error_key([] { parse_config({"--config", write_scratch("u.conf", "omega = 1\ncolour = red\n")}); }) ==
              "colour");
        CHECK(error_key([] { parse_config({"--config", write_scratch("u.json", R"({"temperature": 4})")}); }) ==
              "temperature");
        CHECK(error_key([] { parse_config({"--config", write_scratch("m.conf", "omega 1562\n")}); }) == "line 1");
        CHECK(error_key([] { parse_config({"--config", write_scratch("v.conf", "gamma = fast\n")}); }) == "gamma");
        CHECK(error_key([] { parse_config({"--config", write_scratch("b.json", "{\"omega\": }")}); }) == "config");
        CHECK(error_key([] { parse_config({"--config", (scratch_dir() / "missing.conf").string()}); }) == "config");
    }
}

TEST_CASE("resolved config round-trips through the report block") {
    const std::vector<std::vector<std::string>> cases{
        {},
        {"--scenario", "fig2", "--method", "exact_numeric", "--output", "a.json"},
        {"--kappa", "0.7", "--n-molecules", "333", "--gamma", "0.07"},
        {"--initial-state", "0.6,0:0.48,0:0.64", "--omega", "1234.5678901234567", "--peak-min-separation", "0.3"},
        {"--excitation", "1", "--grid-min", "1300.125", "--grid-max", "1800", "--grid-step", "0.013"},
    };
    for (const auto& args : cases) {
        const RunConfig c = parse_config(args);
        const nlohmann::ordered_json block = to_json(c);
        CHECK(read_config_json(block) == c);
        CHECK(read_config_json(nlohmann::json::parse(block.dump())) == c);
    }
}

TEST_CASE("run products") {
    SECTION("fig1: six peaks at the sextet") {
        const RunProducts r = compute_run(parse_config({"--scenario", "fig1"}));
        const std::vector<double> expected{1509.71, 1549.71, 1557.62, 1589.91, 1597.62, 1629.91};
        REQUIRE(r.report["peaks"].size() == 6);
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(std::abs(r.report["peaks"][i]["position_mev"].get<double>() - expected[i]) <= 0.05);
        REQUIRE(r.report["eigenvalues"].size() == 2);
        CHECK(r.report["eigenvalues"][0]["excitation"] == 2);
        CHECK(r.report["eigenvalues"][0]["method"] == "first_order");
        CHECK(r.report["eigenvalues"][0]["energies_mev"][0].get<double>() == Approx(3091.71).epsilon(1e-9));
        CHECK(r.report["lines"].size() == 6);
        CHECK(r.report.contains("config"));
    }
    SECTION("one excitation: the doublet") {
        const RunProducts r = compute_run(parse_config({"--scenario", "fig1", "--excitation", "1"}));
        REQUIRE(r.peaks.size() == 2);
        CHECK(std::abs(r.peaks[0].position - 1542.0) <= 0.05);
        CHECK(std::abs(r.peaks[1].position - 1582.0) <= 0.05);
    }
    SECTION("fig2: two peaks") {
        const RunProducts r = compute_run(parse_config({"--scenario", "fig2"}));
        REQUIRE(r.peaks.size() == 2);
        CHECK(std::abs(r.peaks[0].position - 1542.0) <= 0.3);
        CHECK(std::abs(r.peaks[1].position - 1582.0) <= 0.3);
    }
    SECTION("small N carries a warning") {
        const RunProducts r = compute_run(parse_config({"--n-molecules", "20"}));
        CHECK(r.report["warnings"].size() == 1);
    }
}

TEST_CASE("output formatting") {
    const RunConfig csv = parse_config({"--scenario", "fig1", "--method", "exact_numeric"});
    const RunProducts a = compute_run(csv);
    const RunProducts b = compute_run(csv);
    CHECK(a.table == b.table);
    CHECK(a.report.dump(2) == b.report.dump(2));

    CHECK(a.table.rfind("omega_mev,s_omega\n", 0) == 0);
    CHECK(a.table.find('\r') == std::string::npos);
    CHECK(a.table.back() == '\n');
    std::istringstream rows(a.table);
    std::string row;
    std::getline(rows, row);
    const std::regex number(R"(-?(\d+)(\.(\d+))?(e[-+]\d+)?)");
    std::size_t n_rows = 0;
    while (std::getline(rows, row)) {
        const auto comma = row.find(',');
        REQUIRE(comma != std::string::npos);
        for (const std::string& cell : {row.substr(0, comma), row.substr(comma + 1)}) {
            std::smatch m;
            REQUIRE(std::regex_match(cell, m, number));
            std::string digits = m[1].str() + m[3].str();
            digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
            CHECK(digits.size() <= 9);
        }
        ++n_rows;
    }
    CHECK(n_rows == csv.grid.size());

    const RunProducts j = compute_run(parse_config({"--scenario", "fig1", "--format", "json"}));
    const nlohmann::json rows_json = nlohmann::json::parse(j.table);
    REQUIRE(rows_json.is_array());
    CHECK(rows_json[0].contains("omega_mev"));
    CHECK(rows_json[0].contains("s_omega"));
    CHECK(round9(1.0 / 3.0) == 0.333333333);
}

TEST_CASE("run_spectrum writes both files") {
    const fs::path dir = scratch_dir();
    const std::string out = (dir / "fig1.csv").string();
    RunConfig c = parse_config({"--scenario", "fig1", "--output", out});
    std::ostringstream log;
    REQUIRE(run_spectrum(c, log) == 0);
    const std::string first = slurp(out);
    const std::string report = slurp((dir / "fig1.report.json").string());
    CHECK(nlohmann::json::parse(report)["peaks"].size() == 6);
    REQUIRE(run_spectrum(c, log) == 0);
    CHECK(slurp(out) == first);

    c.output = (dir / "no_such_dir" / "x.csv").string();
    c.report = (dir / "no_such_dir" / "x.report.json").string();
    CHECK(run_spectrum(c, log) != 0);
}

TEST_CASE("validation suite") {
    std::ostringstream out;
    const auto start = std::chrono::steady_clock::now();
    CHECK(run_validate({ValidationLevel::fast, false}, out) == 0);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);
    INFO(out.str());
    CHECK(out.str().find("FAIL") == std::string::npos);

    std::ostringstream tampered;
    CHECK(run_validate({ValidationLevel::fast, true}, tampered) != 0);
    CHECK(tampered.str().find("FAIL  Hermiticity") != std::string::npos);
}

#include "pcbff/error.hpp"
#include "pcbff/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

using namespace pcbff;
using namespace pcbff::io;

namespace {

simulate::SimScenario tiny_scenario(simulate::StudyMode mode) {
    simulate::SimScenario scn;
    scn.mode = mode;
    scn.n_values = {25, 40};
    scn.replicates = 12;
    scn.bins = 100;
    scn.seed = 3;
    scn.omega_grid = {0.0, 0.1, 0.3, 0.7};
    scn.sweep_omegas = {0.2, 0.6};
    scn.threads = 1;
    if (mode != simulate::StudyMode::null) {
        scn.rho_true = 0.4;
    }
    return scn;
}

CsvTable table_from(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles round-trip through text") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::exp(u(gen)) * (i % 2 ? 1.0 : -1.0);
        CHECK(parse_double(format_double(x), "x") == x);
    }
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(parse_double("+1.5", "x") == 1.5);
    CHECK_THROWS_AS((void)parse_double("1.5x", "x"), DomainError);
    CHECK_THROWS_AS((void)parse_double("", "x"), DomainError);
    CHECK_THROWS_WITH_AS((void)parse_double("abc", "row 3"), doctest::Contains("row 3"),
                         DomainError);
}

TEST_CASE("csv reading") {
    const auto t = table_from("y, x ,z\r\n1,2,3\n\n4, 5,6\n");
    CHECK(t.header == std::vector<std::string>{"y", "x", "z"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1] == "5");
    CHECK_THROWS_AS((void)table_from(""), DomainError);
    CHECK_THROWS_WITH_AS((void)table_from("a,b\n1,2,3\n"), doctest::Contains("line 2"),
                         DomainError);
}

TEST_CASE("column selection") {
    const auto t = table_from("a,b,c,d\n1,2,3,4\n5,6,7,8\n");
    auto d = data_from_table(t, {});
    CHECK(d.y(0) == 1.0);
    CHECK(d.x.cols() == 3);
    CHECK(d.x(0, 0) == 2.0);
    CHECK(d.predictor_names == std::vector<std::string>{"b", "c", "d"});

    d = data_from_table(t, {"c", "d"});
    CHECK(d.y(1) == 7.0);
    CHECK(d.target == 0);
    CHECK(d.predictor_names == std::vector<std::string>{"d", "a", "b"});
    CHECK(d.x(1, 0) == 8.0);

    d = data_from_table(t, {"b", ""});
    CHECK(d.predictor_names.front() == "a");

    CHECK_THROWS_AS((void)data_from_table(t, {"a", "a"}), DomainError);
    CHECK_THROWS_WITH_AS((void)data_from_table(t, {"zz", ""}), doctest::Contains("zz"),
                         DomainError);
    CHECK_THROWS_AS((void)data_from_table(table_from("a\n1\n"), {}), DomainError);
    CHECK_THROWS_WITH_AS((void)data_from_table(table_from("a,b\n1,x\n"), {}),
                         doctest::Contains("column b"), DomainError);
}

TEST_CASE("curve writers") {
    bff::BffCurve curve;
    curve.summary = {-0.06, 40, 2};
    curve.points = {{-0.5, -0.57735026918962573, 6.1666666666666661, -2.9},
                    {0.0, 0.0, 0.0, 0.0},
                    {0.1, 0.10050378152592121, 0.18686868686868685, -0.26}};
    std::ostringstream csv;
    write_curve_csv(csv, curve);
    std::istringstream back(csv.str());
    const auto t = read_csv(back);
    CHECK(t.header == std::vector<std::string>{"rho_mode", "omega", "tau2", "log_bf10"});
    REQUIRE(t.rows.size() == 3);
    CHECK(parse_double(t.rows[0][1], "omega") == curve.points[0].omega);
    CHECK(parse_double(t.rows[2][2], "tau2") == curve.points[2].tau2);

    std::ostringstream js;
    write_curve_json(js, curve);
    const auto doc = nlohmann::json::parse(js.str());
    CHECK(doc["df"] == 37);
    CHECK(doc["branch"] == "symmetric");
    CHECK(doc["density"] == "exact");
    REQUIRE(doc["points"].size() == 3);
    CHECK(doc["points"][0]["tau2"].get<double>() == curve.points[0].tau2);
    CHECK(doc["points"][1]["log_bf10"].get<double>() == 0.0);
}

TEST_CASE("records csv re-aggregates to the stored summaries") {
    for (auto mode : {simulate::StudyMode::null, simulate::StudyMode::sweep}) {
        const auto result = simulate::run_oc(tiny_scenario(mode));
        std::ostringstream out;
        write_oc_records_csv(out, result);
        std::istringstream in(out.str());
        const auto cells = read_oc_records_csv(in);
        REQUIRE(cells.size() == result.cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& a = cells[c];
            const auto& b = result.cells[c];
            CHECK(a.n == b.n);
            CHECK(a.omega_true == b.omega_true);
            CHECK(a.omega_grid == b.omega_grid);
            REQUIRE(a.grid.size() == b.grid.size());
            for (std::size_t j = 0; j < a.grid.size(); ++j) {
                CHECK(a.grid[j].mean_log_bff == b.grid[j].mean_log_bff);
                CHECK(a.grid[j].se_log_bff == b.grid[j].se_log_bff);
                CHECK(a.grid[j].mean_point_log_bf == b.grid[j].mean_point_log_bf);
            }
            CHECK(a.summary.mean_max_log_bff == b.summary.mean_max_log_bff);
            CHECK(a.summary.mean_sb_log_bf == b.summary.mean_sb_log_bf);
            CHECK(a.summary.mean_dev_diff == b.summary.mean_dev_diff);
            CHECK(a.summary.se_dev_diff == b.summary.se_dev_diff);
        }
    }
}

TEST_CASE("aggregates csv has one row per cell and grid point") {
    const auto result = simulate::run_oc(tiny_scenario(simulate::StudyMode::sweep));
    std::ostringstream out;
    write_oc_aggregates_csv(out, result);
    std::istringstream in(out.str());
    const auto t = read_csv(in);
    std::size_t expected = 0;
    for (const auto& cell : result.cells) {
        expected += cell.grid.size();
    }
    CHECK(t.rows.size() == expected);
    CHECK(t.header.size() == 18);
    CHECK(t.header[4] == "mean_log_bff");
}

TEST_CASE("records csv rejects a foreign header") {
    std::istringstream in("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS((void)read_oc_records_csv(in), DomainError);
}

TEST_CASE("scenario json") {
    const auto scn = scenario_from_json(
        R"({"mode": "point", "n": 60, "rho_true": 0.5, "replicates": 10, "bins": 300,
            "branch": "positive", "density": "reference", "seed": 5})");
    CHECK(scn.mode == simulate::StudyMode::point);
    CHECK(scn.n_values == std::vector<int>{60});
    CHECK(scn.branch == bff::Branch::positive);
    CHECK(scn.form == densities::DensityForm::reference);
    CHECK(scn.nuisance_corr == 0.3);

    const auto again = scenario_from_json(scenario_to_json(scn));
    CHECK(again.n_values == scn.n_values);
    CHECK(again.rho_true == scn.rho_true);
    CHECK(again.omega_grid == scn.omega_grid);
    CHECK(again.seed == scn.seed);
    CHECK(again.branch == scn.branch);

    CHECK_THROWS_WITH_AS((void)scenario_from_json(R"({"mode": "null", "reps": 3})"),
                         doctest::Contains("reps"), DomainError);
    CHECK_THROWS_AS((void)scenario_from_json("{"), DomainError);
    CHECK_THROWS_AS((void)scenario_from_json(R"({"mode": "null", "n": "x"})"), DomainError);
    CHECK_THROWS_AS((void)scenario_from_json(R"({"mode": "null", "rho_true": 0.2})"),
                    DomainError);

    const std::filesystem::path dir = PCBFF_TEST_TMP;
    std::filesystem::create_directories(dir);
    const auto path = (dir / "scenario.json").string();
    std::ofstream(path) << scenario_to_json(scn);
    CHECK(load_scenario(path).bins == 300);
    CHECK_THROWS_AS((void)load_scenario((dir / "missing.json").string()), DomainError);
}

}  // TEST_SUITE

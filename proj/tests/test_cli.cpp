#include "doctest.h"

#include <cmath>
#include <sstream>

#include "chi2cav/commands.hpp"
#include "chi2cav/run_config.hpp"
#include "chi2cav/table.hpp"
#include "chi2cav/verify.hpp"

using namespace chi2cav;
using nlohmann::json;

namespace {

json ref_json() {
    return {{"gamma1", 1e7}, {"gamma1_c", 1e7}, {"gamma_s", 1e7}, {"gamma_i", 1e7},
            {"mu1", 1.0},    {"mu2", 1.0},      {"nu_hz", 2.818e14}};
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& cmd, const RunConfig& rc, const CommandFlags& f = {}) {
    std::ostringstream out, err;
    const int code = run_command(cmd, rc, f, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string config_error_key(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST_CASE("config loading") {
    const RunConfig rc = parse_config(ref_json());
    CHECK(rc.tol == 1e-10);
    CHECK(rc.kick == 1e-3);
    CHECK(rc.cascade.order == 2);
    CHECK_FALSE(rc.pump_power);
    CHECK(rc.cavity.fundamental.detuning == 0.0);
    CHECK(rc.cavity.nu == 2.818e14);

    SUBCASE("coupling above total decay names both keys") {
        json j = ref_json();
        j["gamma1_c"] = 2e7;
        try {
            parse_config(j);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("gamma1_c") != std::string::npos);
            CHECK(std::string(e.what()).find("\"gamma1\"") != std::string::npos);
        }
    }
    SUBCASE("strict keys") {
        json j = ref_json();
        j["mu3"] = 1.0;
        CHECK(config_error_key(j) == "mu3");
        j = ref_json();
        j["sweep"] = {{"start", 0.0}, {"stop", 1e-4}, {"stride", 2}};
        CHECK(config_error_key(j) == "sweep.stride");
    }
    SUBCASE("bad values") {
        json j = ref_json();
        j.erase("mu2");
        CHECK(config_error_key(j) == "mu2");
        j = ref_json();
        j["gamma_s"] = -1.0;
        CHECK(config_error_key(j) == "gamma_s");
        j = ref_json();
        j["tol"] = 1e-2;
        CHECK(config_error_key(j) == "tol");
        j = ref_json();
        j["spectrum"] = {{"model", "eq9"}};
        CHECK(config_error_key(j) == "spectrum.model");
        j = ref_json();
        j["nu_hz"] = "fast";
        CHECK(config_error_key(j) == "nu_hz");
    }
    SUBCASE("round trip through json") {
        json j = ref_json();
        j["delta_s"] = 3e6;
        j["pump_power"] = 5e-5;
        j["sweep"] = {{"start", 1e-6}, {"stop", 1e-4}, {"steps", 7}, {"spacing", "log"}};
        j["spectrum"] = {{"model", "eq4"}, {"n_scaled", 0.5}};
        const RunConfig a = parse_config(j);
        const RunConfig b = parse_config(to_json(a));
        CHECK(to_json(a) == to_json(b));
        CHECK(b.cavity.signal.detuning == 3e6);
        CHECK(b.sweep->steps == 7);
        CHECK(b.spectrum->model == SpectrumModel::eq4);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/chi2cav.json"), ConfigError);
}

TEST_CASE("sweep grids") {
    SweepSpec s;
    s.start = 0.0;
    s.stop = 2.0;
    s.steps = 5;
    CHECK(sweep_grid(s) == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    s.start = 1e-6;
    s.stop = 1e-2;
    s.spacing = Spacing::log;
    const auto g = sweep_grid(s);
    CHECK(g.front() == 1e-6);
    CHECK(g[2] == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK(g.back() == 1e-2);
    s.steps = 1;
    CHECK(sweep_grid(s).size() == 1);
}

TEST_CASE("table formatting") {
    CHECK(format_number(1.0) == "1.00000000000000e+00");
    CHECK(format_number(-3.7345e-5) == "-3.73450000000000e-05");
    CHECK(format_number(std::nan("")) == "nan");

    Table t;
    t.columns = {"x", "label", "k"};
    t.rows = {{0.1, std::string("a"), 3LL}, {1.0 / 3.0, std::string("b"), -1LL}};
    t.footer_columns = {"min", "x"};
    t.footer = {{std::string("min"), 0.1}};
    t.notes = {"hello"};
    std::ostringstream os;
    write_csv(os, t);
    const std::string csv = os.str();
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.rfind("# hello\nx,label,k\n", 0) == 0);
    CHECK(csv.find("#min,x\n#min,1.00000000000000e-01\n") != std::string::npos);

    const auto rows = data_rows(csv);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][0]) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(rows[1][2] == "-1");

    const json j = to_json(t);
    CHECK(j["rows"][0]["label"] == "a");
    CHECK(j["footer"][0]["x"] == 0.1);
    CHECK(j["notes"][0] == "hello");
}

TEST_CASE("threshold command") {
    const RunConfig rc = parse_config(ref_json());
    const Run r = run("threshold", rc);
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.rfind("p1_thr_w,p1_min_w,eta,clamped_p2_w,efficiency_at_threshold,mode\n", 0) == 0);
    const auto rows = data_rows(r.out);
    REQUIRE(rows.size() == 1);
    CHECK(std::stod(rows[0][0]) == doctest::Approx(3.7345e-5).epsilon(1e-4));
    CHECK(std::stod(rows[0][1]) == doctest::Approx(std::stod(rows[0][0])).epsilon(1e-13));
    CHECK(std::stod(rows[0][3]) == doctest::Approx(3.7345e-5).epsilon(1e-4));
    CHECK(std::stod(rows[0][4]) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rows[0][5] == "zero_detuning");

    CommandFlags f;
    f.numeric = true;
    const auto num = data_rows(run("threshold", rc, f).out);
    CHECK(num[0][5] == "numeric_bifurcation");
    CHECK(std::stod(num[0][0]) == doctest::Approx(std::stod(rows[0][0])).epsilon(1e-9));

    f.format = "json";
    const json j = json::parse(run("threshold", rc, f).out);
    CHECK(j["columns"].size() == 6);
}

TEST_CASE("clamp-curve command") {
    RunConfig rc = parse_config(ref_json());
    CommandFlags f;
    f.pmin = 0.0;
    f.pmax = 2 * 3.73445313654e-05;
    f.steps = 50;
    f.threads = 3;
    const Run r = run("clamp-curve", rc, f);
    REQUIRE(r.code == exit_ok);
    const auto rows = data_rows(r.out);
    REQUIRE(rows.size() == 50);
    double prev = -1.0, last = std::stod(rows.back()[1]);
    bool flat = false;
    for (const auto& row : rows) {
        const double p2 = std::stod(row[1]);
        CHECK(p2 >= prev);
        if (row[3] == "clamped") {
            flat = true;
            CHECK(p2 == doctest::Approx(last).epsilon(1e-12));
        } else {
            CHECK_FALSE(flat);
            CHECK(row[3] == "below");
        }
        prev = p2;
    }
    CHECK(flat);

    CommandFlags missing;
    CHECK(run("clamp-curve", rc, missing).code == exit_config_error);
}

TEST_CASE("steady command") {
    RunConfig rc = parse_config(ref_json());
    CommandFlags f;
    CHECK(run("steady", rc, f).code == exit_config_error);
    f.power = 2 * 3.73445313654e-05;
    const Run num = run("steady", rc, f);
    REQUIRE(num.code == exit_ok);
    f.analytic = true;
    const Run ana = run("steady", rc, f);
    REQUIRE(ana.code == exit_ok);
    const auto a = data_rows(ana.out)[0], n = data_rows(num.out)[0];
    CHECK(a[6] == "ndopo");
    CHECK(n[6] == "ndopo");
    CHECK(std::stod(n[7]) == doctest::Approx(std::stod(a[7])).epsilon(1e-9));
    CHECK(std::stod(a[8]) == doctest::Approx(3.7345e-5).epsilon(1e-4));

    rc.cavity.signal.detuning = 1e6;
    CHECK(run("steady", rc, f).code == exit_config_error);
}

TEST_CASE("spectrum command") {
    RunConfig rc = parse_config(ref_json());
    CommandFlags f;
    f.model = "eq6";
    f.n_scaled = 3.0;
    f.omega_max = 20.0;
    f.points = 201;
    const Run r = run("spectrum", rc, f);
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.find("omega_hat,f_hz,v2,v2_db\n") != std::string::npos);
    const auto rows = data_rows(r.out);
    REQUIRE(rows.size() == 201);
    CHECK(std::stod(rows[0][2]) == doctest::Approx(2.0).epsilon(1e-14));
    const auto pos = r.out.find("#min,");
    REQUIRE(pos != std::string::npos);
    const std::string footer = r.out.substr(r.out.find('\n', pos) + 1);
    CHECK(footer.rfind("#min,3.2", 0) == 0);

    f.model = "eq4";
    f.n_scaled = 0.5;
    const Run e4 = run("spectrum", rc, f);
    REQUIRE(e4.code == exit_ok);
    CHECK(e4.out.find("omega_rad_s,f_hz,v2,v2_db\n") != std::string::npos);

    f.model = "eq5";
    f.n_scaled = 1.0;
    CHECK(run("spectrum", rc, f).code == exit_config_error);
}

TEST_CASE("cascade command") {
    RunConfig rc = parse_config(ref_json());
    CommandFlags f;
    f.delta = 1e12;
    f.order = 1;
    const auto rows = data_rows(run("cascade", rc, f).out);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0][0] == "ir");
    CHECK(rows[0][3] == "-1");
    CHECK(rows[7][0] == "vis");
    CHECK(std::stod(rows[7][1]) == doctest::Approx(2 * 2.818e14 + 2e12).epsilon(1e-14));
    f.order = 0;
    CHECK(run("cascade", rc, f).code == exit_config_error);
}

TEST_CASE("outputs are deterministic") {
    RunConfig rc = parse_config(ref_json());
    rc.cavity.signal.detuning = 2e6;
    CommandFlags f;
    f.pmin = 1e-6;
    f.pmax = 2e-4;
    f.steps = 9;
    f.threads = 4;
    const Run a = run("clamp-curve", rc, f);
    f.threads = 1;
    const Run b = run("clamp-curve", rc, f);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
}

TEST_CASE("unknown command") { CHECK(run("plot", parse_config(ref_json())).code == exit_config_error); }

TEST_CASE("verify on the reference cavity") {
    const VerifyReport rep = run_verify(parse_config(ref_json()), 4);
    CHECK(rep.overall);
    bool has_eq5 = false;
    for (const auto& c : rep.checks) {
        if (c.status == CheckStatus::fail) MESSAGE(c.name << " measured " << c.measured << " expected " << c.expected);
        CHECK(c.status != CheckStatus::fail);
        has_eq5 |= c.name.find("eq5") != std::string::npos;
    }
    CHECK(has_eq5);
    const json j = to_json(rep);
    CHECK(j["overall"] == true);
    CHECK(j["checks"].size() == rep.checks.size());
}

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ddro/milp.hpp"
#include "ddro/solver.hpp"

using namespace ddro;

TEST_CASE("one-variable model solves to its bound") {
    MilpModel m;
    m.add_continuous("x", -std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), 1.0);
    m.add_row("lb", {{0, 1.0}}, 'G', 1.0);
    const SolveReport rep = solve(m);
    REQUIRE(rep.status == SolveStatus::OptimalWithinGap);
    CHECK(rep.objective == doctest::Approx(1.0));
    CHECK(rep.value(m, "x") == doctest::Approx(1.0));
    CHECK(rep.exit_code() == 0);
}

TEST_CASE("min x subject to x >= 3") {
    MilpModel m;
    m.add_continuous("x", 0.0, std::numeric_limits<double>::infinity(), 1.0);
    m.add_row("r", {{0, 1.0}}, 'G', 3.0);
    const SolveReport rep = solve(m);
    REQUIRE(rep.status == SolveStatus::OptimalWithinGap);
    CHECK(rep.objective == doctest::Approx(3.0));
}

TEST_CASE("infeasible and unbounded statuses") {
    MilpModel bad;
    bad.add_continuous("x", 0.0, 1.0, 1.0);
    bad.add_row("r", {{0, 1.0}}, 'G', 2.0);
    CHECK(solve(bad).status == SolveStatus::Infeasible);
    CHECK(solve(bad).exit_code() == 2);

    MilpModel unb;
    unb.add_continuous("x", -std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity(), 1.0);
    CHECK(solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("export is deterministic and byte-identical") {
    auto make = [] {
        MilpModel m;
        m.add_continuous("cost", -1e4, 1e4, 1.0);
        m.add_binary("pick");
        m.add_continuous("slack!bad name", 0.0, 7.5);
        m.add_row("r1", {{0, 0.25}, {1, -3.0}, {2, 1.0}}, 'L', 2.5);
        m.add_row("r2", {{0, 1.0}}, 'E', 0.125);
        return m;
    };
    std::ostringstream a, b;
    export_lp(make(), a);
    export_lp(make(), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("slack_bad_name") != std::string::npos);  // mangled
}

TEST_CASE("lp-file solve agrees with native solve") {
    MilpModel m;
    m.add_continuous("x", 0.0, std::numeric_limits<double>::infinity(), 2.0);
    m.add_continuous("y", 0.0, std::numeric_limits<double>::infinity(), 3.0);
    m.add_binary("z");
    m.add_row("cover", {{0, 1.0}, {1, 1.0}, {2, 4.0}}, 'G', 5.0);
    m.add_row("cap", {{0, 1.0}}, 'L', 2.0);
    const SolveReport native = solve(m);
    REQUIRE(native.status == SolveStatus::OptimalWithinGap);

    const std::string dir = "lp_roundtrip_scratch";
    std::filesystem::create_directories(dir);
    const std::string lp_path = dir + "/model.lp";
    export_lp(m, lp_path);
    const std::string report = dir + "/report.json";
    const std::string cmd = backend_command({}) + " " + lp_path + " " + report +
                            " --gap 1e-6 --time-limit 60 > " + dir + "/log 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream is(report);
    nlohmann::json doc;
    is >> doc;
    CHECK(doc.at("status") == "optimal");
    CHECK(std::abs(doc.at("objective").get<double>() - native.objective) <=
          1e-6 * std::max(1.0, std::abs(native.objective)));
    std::filesystem::remove_all(dir);
}

TEST_CASE("model validation catches bad data") {
    MilpModel m;
    m.add_continuous("x", 0.0, 1.0);
    m.add_row("r", {{0, std::numeric_limits<double>::quiet_NaN()}}, 'L', 0.0);
    CHECK(!m.validate().empty());

    MilpModel m2;
    m2.add_var("b", VarKind::Binary, 0.0, 2.0, 0.0);
    CHECK(!m2.validate().empty());

    MilpModel m3;
    m3.add_continuous("x", 0.0, 1.0);
    CHECK_THROWS(m3.add_continuous("x", 0.0, 1.0));
    CHECK_THROWS(m3.add_row("r", {{4, 1.0}}, 'L', 0.0));
}

TEST_CASE("gap arithmetic invariant") {
    MilpModel m;
    m.add_continuous("x", 0.0, 10.0, 1.0);
    m.add_binary("b");
    m.add_row("r", {{0, 1.0}, {1, 2.0}}, 'G', 3.0);
    const SolveReport rep = solve(m);
    REQUIRE(rep.has_incumbent);
    CHECK(rep.gap == doctest::Approx(std::abs(rep.objective - rep.bound) /
                                     std::max(1.0, std::abs(rep.objective))));
}

TEST_CASE("name mangling is reversible and unique") {
    NameMangler ng;
    CHECK(ng.safe("plain_name") == "plain_name");
    const std::string a = ng.safe("x(1,2)");
    const std::string b = ng.safe("x(1;2)");
    CHECK(a != b);
    CHECK(ng.renames().count("x(1,2)") == 1);
    CHECK(ng.renames().count("x(1;2)") == 1);
    CHECK(ng.safe("9starts_with_digit").rfind("v_", 0) == 0);
}

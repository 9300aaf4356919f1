#include <doctest.h>

#include <filesystem>

#include "ddro/instance_io.hpp"
#include "ddro/studies.hpp"

using namespace ddro;

namespace {
const std::string kData = std::string(DDRO_SOURCE_DIR) + "/data";

MultistageProblem three_unit_case_b() {
    DesignData d = load_design_data(kData + "/design_3unit.json");
    d.apply_case_b();
    return build_design_problem(d);
}
}  // namespace

TEST_CASE("well-formed design instance passes the shape audit") {
    const MultistageProblem p = three_unit_case_b();
    CHECK(validate_problem(p).empty());
    CHECK(p.s.params_up_to(2) == 5);  // constant + three deviations + demand
    CHECK(p.s.K[2] == 4);
    CHECK(p.ddu.support_lo(2, 4) == doctest::Approx(20.0));
    CHECK(p.ddu.support_hi(2, 4) == doctest::Approx(110.0));
}

TEST_CASE("dimension mismatch is reported") {
    MultistageProblem p = three_unit_case_b();
    p.block[2].A[0] = Eigen::MatrixXd::Zero(p.s.N[2] - 1, p.s.P[1]);
    const auto report = validate_problem(p);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& line : report) found = found || line.find("A^2") != std::string::npos;
    CHECK(found);
}

TEST_CASE("breakpoint at the support bound is reported") {
    MultistageProblem p = three_unit_case_b();
    p.bp.at(2, 4) = {p.ddu.support_hi(2, 4)};
    const auto report = validate_problem(p);
    REQUIRE(!report.empty());
    CHECK(report.front().find("breakpoints") != std::string::npos);
}

TEST_CASE("stage-one convention is enforced") {
    MultistageProblem p = three_unit_case_b();
    p.ddu.hi[1][0] = 2.0;
    CHECK(!validate_problem(p).empty());
    p = three_unit_case_b();
    p.bp.at(1, 1) = {1.0};  // also violates interiority
    CHECK(!validate_problem(p).empty());
}

TEST_CASE("two-stage view round-trips losslessly") {
    const MultistageProblem p = three_unit_case_b();
    const TwoStageView v = as_two_stage(p);
    CHECK(static_cast<int>(v.rows.size()) == p.s.N[2]);
    // perturb then restore through the view
    const MultistageProblem q = from_two_stage(v, p);
    CHECK(instance_to_json(q) == instance_to_json(p));
}

TEST_CASE("three-stage instance rejects the two-stage view") {
    PlanningData d = load_planning_data(kData + "/planning_3unit.json");
    d.T = 1;  // 2T+1 = 3 stages
    const MultistageProblem p = build_planning_problem(d);
    CHECK(p.s.T == 3);
    CHECK_THROWS_AS(as_two_stage(p), std::invalid_argument);
}

TEST_CASE("instance serialization round trip is value-identical") {
    const MultistageProblem p = three_unit_case_b();
    const std::string dumped = instance_to_json(p);
    const MultistageProblem q = instance_from_json(dumped);
    CHECK(instance_to_json(q) == dumped);
    CHECK(validate_problem(q).empty());
    CHECK(q.epigraph_row.has_value());
    CHECK(q.epigraph_row->t == 2);
}

TEST_CASE("planning builder produces the documented stage counts") {
    PlanningData d = load_planning_data(kData + "/planning_3unit.json");
    d.T = 2;
    CHECK(build_planning_problem(d).s.T == 5);
    d.T = 5;
    CHECK(build_planning_problem(d).s.T == 11);
    CHECK(validate_problem(build_planning_problem(d)).empty());
}

TEST_CASE("malformed instance files are rejected with context") {
    CHECK_THROWS(instance_from_json("{}"));
    CHECK_THROWS(instance_from_json("{\"stages\": {\"T\": 2, \"K\": [1], \"P\": [1], "
                                    "\"Q\": [0], \"N\": [0]}}"));
}

TEST_CASE("design case rules derive the documented demand bounds") {
    DesignData d = load_design_data(kData + "/design_3unit.json");
    d.apply_case_a();
    CHECK(d.d_min == doctest::Approx(2.0));
    CHECK(d.d_max == doctest::Approx(290.0));
    d.apply_case_b();
    CHECK(d.d_min == doctest::Approx(20.0));
    CHECK(d.d_max == doctest::Approx(110.0));
}

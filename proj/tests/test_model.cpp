#include <doctest.h>

#include "pwmstab/model.hpp"
#include "test_support.hpp"

using namespace pwmstab;

TEST_CASE("ideal buck matrices") {
    const auto p = testsup::canonical_buck();
    const auto m = build_buck(p);
    const double L = p.inductance_L, C = p.capacitance_C, R = p.load_R;

    CHECK(m.A1(0, 0) == 0.0);
    CHECK(m.A1(0, 1) == doctest::Approx(-1.0 / L));
    CHECK(m.A1(1, 0) == doctest::Approx(1.0 / C));
    CHECK(m.A1(1, 1) == doctest::Approx(-1.0 / (R * C)));
    CHECK((m.A1 - m.A2).norm() == 0.0); // same stage matrix for the ideal buck

    const Vec b1u = m.B1 * m.input_u;
    const Vec b2u = m.B2 * m.input_u;
    CHECK(b1u(0) == doctest::Approx(p.source_vs / L));
    CHECK(b1u(1) == 0.0);
    CHECK(b2u.norm() == 0.0);

    CHECK(m.output_E(0) == 0.0);
    CHECK(m.output_E(1) == doctest::Approx(1.0)); // selects v_C
}

TEST_CASE("buck with parasitics matches the hand derivation") {
    // L = 1, C = 1, R = 2, r_C = 0.5, r_L = 0.1 worked out on paper:
    // alpha = 0.8, A = [[-0.5, -0.8], [0.8, -0.4]], E = [0.4, 0.8].
    ConverterParams p;
    p.topology = Topology::buck;
    p.inductance_L = 1.0;
    p.capacitance_C = 1.0;
    p.load_R = 2.0;
    p.source_vs = 10.0;
    p.period_T = 1.0;
    p.esr_rC = 0.5;
    p.resistance_rL = 0.1;
    const auto m = build_buck(p);

    CHECK(m.A1(0, 0) == doctest::Approx(-0.5));
    CHECK(m.A1(0, 1) == doctest::Approx(-0.8));
    CHECK(m.A1(1, 0) == doctest::Approx(0.8));
    CHECK(m.A1(1, 1) == doctest::Approx(-0.4));
    CHECK(m.output_E(0) == doctest::Approx(0.4));
    CHECK(m.output_E(1) == doctest::Approx(0.8));
}

TEST_CASE("ideal boost stage matrices and trace cancellation") {
    const auto p = testsup::canonical_boost();
    const auto m = build_boost(p);
    const double L = p.inductance_L, C = p.capacitance_C, R = p.load_R;

    CHECK(m.A1(0, 0) == 0.0);
    CHECK(m.A1(0, 1) == 0.0);
    CHECK(m.A1(1, 0) == 0.0);
    CHECK(m.A1(1, 1) == doctest::Approx(-1.0 / (R * C)));

    CHECK(m.A2(0, 1) == doctest::Approx(-1.0 / L));
    CHECK(m.A2(1, 0) == doctest::Approx(1.0 / C));
    CHECK(m.A2(1, 1) == doctest::Approx(-1.0 / (R * C)));

    // Both stage traces are -1/(RC): tr[A2 - A1] vanishes for the ideal
    // boost, so the necessary-condition right side reduces to e^{T/(RC)}.
    CHECK((m.A2 - m.A1).trace() == doctest::Approx(0.0));

    // ideal output map selects v_C
    CHECK(m.output_E(0) == 0.0);
    CHECK(m.output_E(1) == doctest::Approx(1.0));
}

TEST_CASE("boost with parasitics breaks the trace symmetry") {
    ConverterParams p;
    p.topology = Topology::boost;
    p.inductance_L = 1.0;
    p.capacitance_C = 1.0;
    p.load_R = 2.0;
    p.source_vs = 5.0;
    p.period_T = 1.0;
    p.esr_rC = 0.5;
    p.resistance_rL = 0.1;
    const auto m = build_boost(p);

    CHECK(m.A1(0, 0) == doctest::Approx(-0.1));
    CHECK(m.A1(1, 1) == doctest::Approx(-0.4));
    CHECK(m.A2(0, 0) == doctest::Approx(-0.5));
    CHECK(m.A2(0, 1) == doctest::Approx(-0.8));
    CHECK(m.A2(1, 0) == doctest::Approx(0.8));
    CHECK(m.A2(1, 1) == doctest::Approx(-0.4));
    CHECK((m.A2 - m.A1).trace() == doctest::Approx(-0.4));
}

TEST_CASE("vector_field: buck on-stage at the origin") {
    const auto p = testsup::canonical_buck();
    const auto m = build_buck(p);
    const Vec f = vector_field(m, Stage::on, Vec::Zero(2));
    CHECK(f(0) == doctest::Approx(p.source_vs / p.inductance_L));
    CHECK(f(1) == 0.0);
}

TEST_CASE("vector_field: stage difference is (A1-A2)x + (B1-B2)u") {
    const auto m = build_boost(testsup::canonical_boost());
    Vec x(2);
    x << 0.7, 9.0;
    const Vec diff = vector_field(m, Stage::on, x) - vector_field(m, Stage::off, x);
    const Vec expected =
        (m.A1 - m.A2) * x + (m.B1 - m.B2) * m.input_u;
    CHECK((diff - expected).norm() < 1e-12 * (1.0 + expected.norm()));
}

TEST_CASE("vector_field: dimension mismatch") {
    const auto m = build_buck(testsup::canonical_buck());
    CHECK_THROWS_AS(vector_field(m, Stage::on, Vec::Zero(3)), DimensionError);
}

TEST_CASE("ramp: value and slope conventions") {
    SwitchingRule r = testsup::canonical_buck_rule(2.0, 1e5);
    CHECK(ramp_value(r, 0.0) == doctest::Approx(2.0));
    CHECK(ramp_value(r, 1e-5) == doctest::Approx(2.0 - 1.0));
    CHECK(ramp_slope(r) == doctest::Approx(-1e5));

    SwitchingRule flat = testsup::canonical_buck_rule(2.0, 0.0);
    CHECK(ramp_value(flat, 3e-6) == doctest::Approx(2.0));
}

TEST_CASE("parameter validation names the offending field") {
    auto p = testsup::canonical_buck();
    p.inductance_L = -1.0;
    try {
        build_buck(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("inductance") != std::string::npos);
    }

    auto q = testsup::canonical_buck();
    q.load_R = 0.0;
    CHECK_THROWS_AS(build_buck(q), ValidationError);
}

TEST_CASE("switching rule validation") {
    SwitchingRule r;
    r.feedback_F = RowVec::Zero(2);
    r.control_level = 1.0;
    CHECK_THROWS_AS(r.validate(2), ValidationError);

    r.feedback_F = default_feedback(2);
    r.ramp_slope_mc = -1.0;
    CHECK_THROWS_AS(r.validate(2), ValidationError);
}

TEST_CASE("sweep parameter plumbing") {
    auto p = testsup::canonical_buck();
    auto r = testsup::canonical_buck_rule();
    set_param(p, r, SweepParam::m_c, 5e4);
    CHECK(r.ramp_slope_mc == 5e4);
    set_param(p, r, SweepParam::load_R, 7.5);
    CHECK(p.load_R == 7.5);
    CHECK(sweep_param_from_name("period_T") == SweepParam::period_T);
    CHECK_THROWS_AS(sweep_param_from_name("banana"), ValidationError);
}

#include <doctest.h>

#include "rbqa/oracle.hpp"
#include "test_util.hpp"

using namespace rbqa;
using namespace rbqa::testutil;

TEST_CASE("naive_containment decides the running examples") {
    // Q2 holds: the bound-1 listing access still reveals one row.
    auto p2 = oracle_problem(q2(), university_schema(100));
    auto r2 = naive_containment(p2, Budget{});
    CHECK(r2.answer == OracleAnswer::Holds);
    REQUIRE(r2.witness.has_value());

    // Q1 fails within budget: the reachable fragment saturates without a
    // primed fact carrying the frozen name.
    auto p1 = oracle_problem(q1(), university_schema(100));
    auto r1 = naive_containment(p1, Budget{});
    CHECK(r1.answer == OracleAnswer::FailsWithin);
}

TEST_CASE("trivial containment holds at round zero") {
    Schema s;
    s.signature.add(S("R"), 1);
    s.methods.push_back(AccessMethod{S("m"), S("R"), {1}, BoundKind::None, 0});
    auto q = query("Q", {}, {qatom("R", {C("a")})});
    auto p = oracle_problem(q, s);
    auto r = naive_containment(p, Budget{});
    CHECK(r.answer == OracleAnswer::Holds);
    CHECK(r.stats.rounds <= 1);
}

TEST_CASE("oracle answers never flip when the budget grows") {
    CaseGenerator gen(99);
    for (int i = 0; i < 40; ++i) {
        auto rc = gen.next(i % 2 ? ConstraintClass::IdOnly : ConstraintClass::UidFd);
        auto p = oracle_problem(rc.query, rc.schema);
        Budget small;
        small.max_depth = 4;
        small.max_rounds = 8;
        Budget large;
        large.max_depth = 8;
        large.max_rounds = 24;
        auto rs = naive_containment(p, small);
        auto rl = naive_containment(p, large);
        if (rs.answer != OracleAnswer::Unknown) CHECK(rs.answer == rl.answer);
    }
}

TEST_CASE("differential smoke run has no disagreements") {
    Budget b;
    b.max_depth = 8;
    b.max_rounds = 32;
    b.max_facts = 20000;
    auto report = differential_run(4242, 60,
                                   {ConstraintClass::FdOnly, ConstraintClass::IdOnly,
                                    ConstraintClass::UidFd},
                                   b);
    CHECK(report.cases == 60);
    CHECK(report.disagreements == 0);
    CHECK(report.comparable > 0);
    auto j = report.to_json();
    CHECK(j["disagreements"] == 0);
}

#include <doctest.h>

#include "rbqa/decide.hpp"
#include "test_util.hpp"

using namespace rbqa;
using namespace rbqa::testutil;

TEST_CASE("the existence check is answerable over the bounded directory") {
    auto v = decide_monotone_answerability(q2(), university_schema(100), Budget{});
    CHECK(v.answer == Answer::Answerable);
    CHECK(v.cls == ConstraintClass::IdOnly);
    CHECK(v.route == Route::BoundedWidthRoute);
    CHECK(v.finite_variant == FiniteVariant::SameAsUnrestricted);
    REQUIRE(v.witness.has_value());
}

TEST_CASE("the address lookup is answerable through the FD route") {
    auto v = decide_monotone_answerability(q3(), fd_schema(), Budget{});
    CHECK(v.answer == Answer::Answerable);
    CHECK(v.cls == ConstraintClass::FdOnly);
    CHECK(v.route == Route::FdRoute);
    REQUIRE(v.witness.has_value());
    // The witness hits the frozen address variable.
    CHECK(v.witness->assignment.count(S("a")) == 1);
}

TEST_CASE("the salary query is not answerable once the listing is bounded") {
    auto v = decide_monotone_answerability(q1(), university_schema(100), Budget{});
    CHECK(v.answer == Answer::NotAnswerable);
    CHECK(v.route == Route::BoundedWidthRoute);
    CHECK_FALSE(v.witness.has_value());

    // Removing the bound restores the classic plan.
    Schema unbounded = university_schema();
    unbounded.methods[1].bound_kind = BoundKind::None;
    auto v2 = decide_monotone_answerability(q1(), unbounded, Budget{});
    CHECK(v2.answer == Answer::Answerable);
}

TEST_CASE("verdicts are invariant under upper-bound elimination and bound values") {
    for (auto q : {q1(), q2()}) {
        auto base = decide_monotone_answerability(q, university_schema(100), Budget{});
        auto lowered = decide_monotone_answerability(q, elim_ub(university_schema(100)), Budget{});
        CHECK(base.answer == lowered.answer);
        for (long k : {1L, 2L, 5L}) {
            auto vk = decide_monotone_answerability(q, university_schema(k), Budget{});
            CHECK(vk.answer == base.answer);
        }
    }
}

TEST_CASE("FD schemas agree between the FD route and the choice route") {
    // With zero UIDs the separable rewrite applies to FD-only schemas too.
    Schema s = elim_ub(fd_schema());
    for (auto q : {q2(), q3()}) {
        auto via_fd = fd_route(q, s, Budget{});
        auto via_choice = uidfd_route(q, s, Budget{});
        REQUIRE(via_fd.answer != Answer::Unknown);
        REQUIRE(via_choice.answer != Answer::Unknown);
        CHECK(via_fd.answer == via_choice.answer);
    }
}

TEST_CASE("answerable witnesses re-verify against the final state") {
    auto v = decide_monotone_answerability(q3(), fd_schema(), Budget{});
    REQUIRE(v.witness.has_value());
    REQUIRE(v.final_instance.has_value());
    for (const auto& f : v.witness->matched_facts) CHECK(v.final_instance->contains(f));
}

namespace {

// Recursive, non-frontier-guarded constraints whose restricted chase never
// terminates: R and T keep feeding each other fresh values, and the S-rule
// spreads its frontier over two body atoms.
Schema recursive_tgd_schema() {
    Schema s;
    s.signature.add(S("R"), 2);
    s.signature.add(S("T"), 2);
    s.signature.add(S("Sx"), 3);
    s.constraints.push_back(tgd({tatom("R", {"x", "y"})}, {tatom("T", {"y", "z"})}));
    s.constraints.push_back(tgd({tatom("T", {"x", "y"}), tatom("R", {"u", "x"})},
                                {tatom("R", {"y", "v"})}));
    s.constraints.push_back(tgd({tatom("R", {"x", "y"}), tatom("T", {"u", "v"})},
                                {tatom("Sx", {"x", "u", "w"})}));
    s.methods.push_back(AccessMethod{S("m"), S("T"), {1}, BoundKind::None, 0});
    return s;
}

} // namespace

TEST_CASE("unknown verdicts surface budget exhaustion") {
    Schema s = recursive_tgd_schema();
    // Ask for something never derivable in primed form while the chase keeps
    // growing; a tiny budget cannot settle it.
    auto q = query("Q", {}, {qatom("R", {C("a"), C("b")}), qatom("Sx", {C("a"), C("b"), C("c")})});
    Budget tiny;
    tiny.max_depth = 3;
    tiny.max_rounds = 3;
    auto v = decide_monotone_answerability(q, s, tiny);
    CHECK(v.answer == Answer::Unknown);
    CHECK(v.cls == ConstraintClass::GeneralTgd);
}

TEST_CASE("FD conflicts in the seed are reported as errors") {
    Schema s;
    s.signature.add(S("R"), 2);
    s.constraints.push_back(fd("R", {2}, 1));
    s.methods.push_back(AccessMethod{S("m"), S("R"), {1}, BoundKind::ResultBound, 1});
    auto q = query("Q", {}, {qatom("R", {C("a"), V("y")}), qatom("R", {C("b"), V("y")})});
    CHECK_THROWS_AS(decide_monotone_answerability(q, s, Budget{}), DecideError);
}

TEST_CASE("UID+FD schemas route through the separable rewrite") {
    Schema s;
    s.signature.add(S("R"), 2);
    s.signature.add(S("T"), 2);
    s.constraints.push_back(fd("R", {1}, 2));
    s.constraints.push_back(tgd({tatom("R", {"x", "y"})}, {tatom("T", {"y", "z"})}));
    s.methods.push_back(AccessMethod{S("mr"), S("R"), {1}, BoundKind::ResultBound, 1});
    s.methods.push_back(AccessMethod{S("mt"), S("T"), {1}, BoundKind::None, 0});
    auto q = query("Q", {}, {qatom("R", {C("a"), V("y")})});
    auto v = decide_monotone_answerability(q, s, Budget{});
    CHECK(v.cls == ConstraintClass::UidFd);
    CHECK(v.route == Route::UidFdSeparableRoute);
    CHECK(v.finite_variant == FiniteVariant::NotSupported);
    CHECK(v.answer == Answer::Answerable); // access mr with the constant a
}

TEST_CASE("explain renders a narrative and to_json has the contract keys") {
    auto v = decide_monotone_answerability(q2(), university_schema(100), Budget{});
    auto text = explain(v);
    CHECK(text.find("verdict: answerable") != std::string::npos);
    CHECK(text.find("route:") != std::string::npos);
    CHECK(text.find("match:") != std::string::npos);

    auto j = v.to_json();
    for (const char* key :
         {"verdict", "class", "route", "budget", "witness", "finite_variant", "timings"})
        CHECK(j.contains(key));

    auto unknown = decide_monotone_answerability(
        query("Q", {}, {qatom("R", {C("a"), C("b")}), qatom("Sx", {C("a"), C("b"), C("c")})}),
        recursive_tgd_schema(), Budget{3, 1000, 3});
    auto text2 = explain(unknown);
    CHECK(text2.find("verdict: unknown") != std::string::npos);
    CHECK(text2.find("budget") != std::string::npos);
}

TEST_CASE("decide validates schema and query up front") {
    Schema bad;
    bad.signature.add(S("R"), 2);
    bad.methods.push_back(AccessMethod{S("m"), S("Nope"), {}, BoundKind::None, 0});
    CHECK_THROWS_AS(decide_monotone_answerability(q2(), bad, Budget{}), DecideError);

    Schema ok;
    ok.signature.add(S("R"), 2);
    auto q = query("Q", {}, {qatom("Missing", {V("x")})});
    CHECK_THROWS_AS(decide_monotone_answerability(q, ok, Budget{}), ModelError);
}

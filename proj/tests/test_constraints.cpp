#include <doctest.h>

#include "test_util.hpp"

#include <algorithm>
#include <random>

using namespace rbqa;
using namespace rbqa::testutil;

TEST_CASE("classify recognizes UIDs, full TGDs and frontier-guardedness") {
    // R(x,y) -> exists z,w. S(z,y,w): a unary inclusion dependency.
    std::vector<Dependency> uid{tgd({tatom("R", {"x", "y"})}, {tatom("S", {"z", "y", "w"})})};
    auto p1 = classify(uid);
    CHECK(p1.flags[0].is_id);
    CHECK(p1.flags[0].is_uid);
    CHECK(p1.width == 1);
    CHECK(p1.cls == ConstraintClass::IdOnly);

    // R(x,y) -> R(y,x): full, width 2.
    std::vector<Dependency> full{tgd({tatom("R", {"x", "y"})}, {tatom("R", {"y", "x"})})};
    auto p2 = classify(full);
    CHECK(p2.flags[0].is_full);
    CHECK(p2.flags[0].width == 2);

    // A(x), R(x,y) -> exists z. S(x,z): R(x,y) covers the whole body, so the
    // rule is guarded outright, and in particular frontier-guarded.
    std::vector<Dependency> fg{
        tgd({tatom("A", {"x"}), tatom("R", {"x", "y"})}, {tatom("S", {"x", "z"})})};
    auto p3 = classify(fg);
    CHECK(p3.flags[0].is_guarded);
    CHECK(p3.flags[0].is_frontier_guarded);
    CHECK(p3.cls == ConstraintClass::FrontierGuarded);

    // A(x), R(x,y), T(y,w) -> exists z. S(x,z): no single atom covers
    // {x,y,w}, but A covers the frontier {x}.
    std::vector<Dependency> fg2{tgd({tatom("A", {"x"}), tatom("R", {"x", "y"}), tatom("T", {"y", "w"})},
                                    {tatom("S", {"x", "z"})})};
    auto p4 = classify(fg2);
    CHECK_FALSE(p4.flags[0].is_guarded);
    CHECK(p4.flags[0].is_frontier_guarded);
}

TEST_CASE("classify set-level labels") {
    std::vector<Dependency> none;
    CHECK(classify(none).cls == ConstraintClass::IdOnly);

    std::vector<Dependency> fds{fd("R", {1}, 2)};
    CHECK(classify(fds).cls == ConstraintClass::FdOnly);

    std::vector<Dependency> uidfd{fd("R", {1}, 2),
                                  tgd({tatom("R", {"x", "y"})}, {tatom("S", {"y", "z"})})};
    CHECK(classify(uidfd).cls == ConstraintClass::UidFd);

    // Width-2 ID plus an FD is not the UID+FD class.
    std::vector<Dependency> mixed{fd("R", {1}, 2),
                                  tgd({tatom("R", {"x", "y"})}, {tatom("S", {"x", "y", "z"})})};
    CHECK(classify(mixed).cls == ConstraintClass::Mixed);

    // Repeated variable in a single-atom rule: not an ID (it still lands in
    // the frontier-guarded class since the body atom guards everything).
    std::vector<Dependency> rep{tgd({tatom("R", {"x", "x"})}, {tatom("S", {"x"})})};
    CHECK_FALSE(classify(rep).flags[0].is_id);
    CHECK(classify(rep).cls == ConstraintClass::FrontierGuarded);
}

TEST_CASE("classify is stable under reordering") {
    std::vector<Dependency> deps{fd("R", {1}, 2),
                                 tgd({tatom("R", {"x", "y"})}, {tatom("S", {"y", "z"})}),
                                 fd("S", {2}, 1)};
    auto cls = classify(deps).cls;
    std::vector<Dependency> perm{deps[2], deps[0], deps[1]};
    CHECK(classify(perm).cls == cls);
    std::vector<Dependency> perm2{deps[1], deps[2], deps[0]};
    CHECK(classify(perm2).cls == cls);
}

TEST_CASE("detby closes under the per-relation FDs") {
    std::vector<Fd> one{fd("Udirectory", {1}, 2)};
    CHECK(detby(one, S("Udirectory"), {1}) == std::set<int>{1, 2});

    std::vector<Fd> nofds;
    CHECK(detby(nofds, S("R"), {2}) == std::set<int>{2});

    std::vector<Fd> chain{fd("R", {1}, 2), fd("R", {2}, 3)};
    CHECK(detby(chain, S("R"), {1}) == std::set<int>{1, 2, 3});

    // FDs on other relations never contribute.
    std::vector<Fd> other{fd("T", {1}, 2)};
    CHECK(detby(other, S("R"), {1}) == std::set<int>{1});
}

namespace {

// Reference closure: repeatedly try every subset inference by scanning all
// FDs, no matter the order.
std::set<int> brute_closure(const std::vector<Fd>& fds, Symbol rel, std::set<int> base) {
    for (int step = 0; step < 16; ++step)
        for (const auto& f : fds)
            if (f.rel == rel &&
                std::all_of(f.determinant.begin(), f.determinant.end(),
                            [&](int p) { return base.count(p) > 0; }))
                base.insert(f.determined);
    return base;
}

} // namespace

TEST_CASE("detby is monotone, idempotent and extensive") {
    std::mt19937 rng(13);
    Symbol rel = S("R");
    for (int round = 0; round < 100; ++round) {
        std::vector<Fd> fds;
        int n = static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            std::vector<int> det{1 + static_cast<int>(rng() % 4)};
            if (rng() % 2) det.push_back(1 + static_cast<int>(rng() % 4));
            std::sort(det.begin(), det.end());
            det.erase(std::unique(det.begin(), det.end()), det.end());
            fds.push_back(Fd{rel, det, 1 + static_cast<int>(rng() % 4)});
        }
        std::set<int> p;
        for (int pos = 1; pos <= 4; ++pos)
            if (rng() % 2) p.insert(pos);
        auto closed = detby(fds, rel, p);
        CHECK(std::includes(closed.begin(), closed.end(), p.begin(), p.end()));
        CHECK(detby(fds, rel, closed) == closed);
        CHECK(closed == brute_closure(fds, rel, p));
        std::set<int> bigger = p;
        bigger.insert(1);
        auto closed2 = detby(fds, rel, bigger);
        CHECK(std::includes(closed2.begin(), closed2.end(), closed.begin(), closed.end()));
    }
}

TEST_CASE("minimize_query_under_fds merges redundant atoms") {
    Signature sig;
    sig.add(S("R"), 2);
    std::vector<Fd> fds{fd("R", {1}, 2)};
    auto q = query("Q", {"x"}, {qatom("R", {V("x"), V("y")}), qatom("R", {V("x"), V("z")})});
    auto m = minimize_query_under_fds(q, fds, sig);
    REQUIRE_FALSE(m.unsatisfiable);
    CHECK(m.query.atoms.size() == 1);
    CHECK(m.query.free_vars == std::vector<Symbol>{S("x")});
}

TEST_CASE("minimize_query_under_fds is the identity without FDs") {
    Signature sig;
    sig.add(S("R"), 2);
    auto q = query("Q", {"x"}, {qatom("R", {V("x"), V("y")}), qatom("R", {V("y"), V("x")})});
    auto m = minimize_query_under_fds(q, {}, sig);
    CHECK(m.query.atoms == q.atoms);
    CHECK(m.query.free_vars == q.free_vars);
}

TEST_CASE("minimize_query_under_fds reports merged distinct constants") {
    Signature sig;
    sig.add(S("R"), 2);
    std::vector<Fd> fds{fd("R", {2}, 1)};
    auto q = query("Q", {}, {qatom("R", {C("a"), V("y")}), qatom("R", {C("b"), V("y")})});
    auto m = minimize_query_under_fds(q, fds, sig);
    CHECK(m.unsatisfiable);
}

TEST_CASE("minimized queries agree with the original on FD-satisfying instances") {
    std::mt19937 rng(17);
    Signature sig;
    sig.add(S("R"), 2);
    std::vector<Fd> fds{fd("R", {1}, 2)};
    for (int round = 0; round < 100; ++round) {
        // Random instance satisfying the FD: function from first to second.
        Instance inst;
        for (char c = 'a'; c <= 'd'; ++c)
            if (rng() % 2)
                inst.add(fact("R", {cv(std::string(1, c)),
                                    cv(std::string(1, static_cast<char>('a' + rng() % 4)))}));
        ConjunctiveQuery q;
        q.name = S("Q");
        int atoms = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < atoms; ++i)
            q.atoms.push_back(qatom("R", {V("x" + std::to_string(rng() % 3)),
                                          V("x" + std::to_string(rng() % 3))}));
        auto vars = q.variables();
        for (Symbol v : vars)
            if (rng() % 3 == 0) q.free_vars.push_back(v);
        auto m = minimize_query_under_fds(q, fds, sig);
        REQUIRE_FALSE(m.unsatisfiable);
        CHECK(m.query.atoms.size() <= q.atoms.size());
        // Project both outputs through the original free-variable list.
        auto expect = eval_cq(q, inst);
        auto got = eval_cq(m.query, inst);
        CHECK(expect == got);
    }
}

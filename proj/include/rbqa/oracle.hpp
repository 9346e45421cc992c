#pragma once

#include "rbqa/decide.hpp"

#include <random>

namespace rbqa {

enum class OracleAnswer { Holds, FailsWithin, Unknown };

struct OracleResult {
    OracleAnswer answer = OracleAnswer::Unknown;
    ChaseOutcome outcome = ChaseOutcome::BudgetExhausted;
    std::optional<Assignment> witness;
    ChaseStats stats;
};

// Breadth-first restricted chase of the problem's constraints, checking the
// target after every round. No linearization, no prunings. Holds when the
// target matches, FailsWithin when the chase saturates without a match,
// Unknown when the budget runs out first.
OracleResult naive_containment(const ContainmentProblem& p, const Budget& budget);

const char* to_string(OracleAnswer a);

// Seeded random (schema, query) generator for the differential harness.
struct RandomCase {
    Schema schema;
    ConjunctiveQuery query;
    ConstraintClass family;
};

class CaseGenerator {
public:
    explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}
    RandomCase next(ConstraintClass family);

private:
    std::mt19937_64 rng_;
};

struct DiffRecord {
    int index = 0;
    std::string family;
    std::string decide_answer;
    std::string oracle_answer;
    bool comparable = false;
    bool agree = true;
    bool skipped = false; // seed conflicts under the FDs
};

struct DiffReport {
    std::uint64_t seed = 0;
    int cases = 0;
    int comparable = 0;
    int disagreements = 0;
    int skipped = 0;
    std::vector<DiffRecord> records;
    nlohmann::json to_json() const;
};

// Runs decide against the direct chase of the choice-simplified reduction
// (and, for ID schemas, the normalized existence-check gamma) on randomly
// generated cases. A disagreement between two definite answers is a failure.
DiffReport differential_run(std::uint64_t seed, int case_count,
                            const std::vector<ConstraintClass>& families, const Budget& budget);

// The executable containment problem used as the oracle's view of a case:
// bounds collapsed to one, then the plain reduction.
ContainmentProblem oracle_problem(const ConjunctiveQuery& q, const Schema& s);

} // namespace rbqa

#pragma once

#include "rbqa/constraints.hpp"
#include "rbqa/union_find.hpp"

#include <functional>
#include <limits>

namespace rbqa {

struct Budget {
    int max_rounds = 64;
    long max_facts = 50000;
    int max_depth = 12;

    static Budget unlimited() {
        return Budget{std::numeric_limits<int>::max() / 2,
                      std::numeric_limits<long>::max() / 2,
                      std::numeric_limits<int>::max() / 2};
    }
};

enum class ChaseOutcome { Saturated, BudgetExhausted, FdConflict, StoppedEarly };

enum class RoundOrder { Standard, PrimedUidsLast };

struct ChasePolicy {
    RoundOrder order = RoundOrder::Standard;
    // Aligned with the dependency list; marked rules fire only in rounds where
    // nothing else is active. Used for the "primed copies last" requirement.
    std::vector<bool> fire_last;
};

struct Trigger {
    int dep_index = 0;
    bool is_fd = false;
    Assignment hom;          // TGD: body variables -> values
    std::vector<Fact> image; // TGD: body facts; FD: the two witnessing facts
    auto operator<=>(const Trigger&) const = default;
};

struct FiringEvent {
    int dep_index;
    std::vector<Fact> body;
    std::vector<Fact> produced;
};

struct MergeEvent {
    Value from, to;
};

struct RoundLog {
    int index = 0;
    std::vector<FiringEvent> firings;
    std::vector<MergeEvent> merges;
};

struct ChaseStats {
    int rounds = 0;
    long tgd_firings = 0;
    long fd_firings = 0;
    long merges = 0;
    int max_depth_seen = 0;
    bool depth_skipped = false;
    bool facts_overflow = false;
    bool rounds_overflow = false;
};

class ChaseState {
public:
    ChaseState() = default;
    explicit ChaseState(Instance initial);

    const Instance& instance() const { return facts_; }
    const ValueUnionFind& unions() const { return uf_; }
    Value canon(Value v) const { return uf_.find(v); }
    Tuple canon(const Tuple& t) const { return uf_.map(t); }
    Fact canon(const Fact& f) const { return Fact{f.rel, uf_.map(f.tuple)}; }

    int depth_of(const Fact& f) const;
    int round() const { return round_; }
    const std::vector<RoundLog>& log() const { return log_; }

    Value fresh_null() { return Value::null(next_null_++); }

    // Internal mutators used by fire(); exposed for the engine only.
    bool add_fact(Fact f, int depth);
    // Returns false on a constant-constant conflict.
    bool merge_values(Value a, Value b);
    void begin_round();
    RoundLog& current_log();

    // Facts added or rewritten since the last take_delta(); drives the
    // semi-naive trigger search.
    std::vector<Fact> take_delta();

private:
    void recanonicalize();

    Instance facts_;
    ValueUnionFind uf_;
    std::map<Fact, int> depth_;
    std::set<Fact> delta_;
    std::vector<RoundLog> log_;
    int round_ = 0;
    std::uint32_t next_null_ = 0;
};

// All active triggers of `deps` in `state`, deterministically ordered by
// (dependency index, body image, assignment). TGD triggers are homomorphisms
// whose head admits no extension; FD triggers are fact pairs that agree on the
// determinant and disagree on the determined position.
std::vector<Trigger> find_active_triggers(const ChaseState& state,
                                          std::span<const Dependency> deps);

// Semi-naive variant: only triggers whose body touches one of the given
// facts. With delta = facts added or rewritten in the previous round this is
// exhaustive, because a trigger over older facts was already handled and
// facts are never removed.
std::vector<Trigger> find_active_triggers_delta(const ChaseState& state,
                                                std::span<const Dependency> deps,
                                                std::span<const Fact> delta);

enum class FireResult { Fired, Inactive, Conflict, DepthSkipped };

// Fires one trigger. Re-verifies activity against the current state first, so
// a trigger list collected at round start can be replayed safely.
FireResult fire(ChaseState& state, const Trigger& trigger, std::span<const Dependency> deps,
                int max_depth = std::numeric_limits<int>::max() / 2);

struct ChaseResult {
    ChaseState state;
    ChaseOutcome outcome = ChaseOutcome::Saturated;
    ChaseStats stats;
};

// Round-based restricted chase: fire all currently-active triggers per round
// in deterministic order, then recompute, until no trigger is active or the
// budget is hit. `match_hook` runs before the first round and after every
// round; returning true stops the chase with outcome StoppedEarly.
ChaseResult chase_to_fixpoint(Instance initial, std::span<const Dependency> deps,
                              const Budget& budget, const ChasePolicy& policy = {},
                              const std::function<bool(const ChaseState&)>& match_hook = {});

enum class TraceFormat { Dot, Json };

std::string export_trace(const ChaseResult& result, TraceFormat format);

const char* to_string(ChaseOutcome outcome);

} // namespace rbqa

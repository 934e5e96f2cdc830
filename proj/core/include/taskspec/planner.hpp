#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "taskspec/automaton.hpp"

namespace taskspec {

// Sub-goals that cannot currently be executed (their object is not detected).
struct AvailabilityView {
    std::set<SymbolId> unreachable;

    bool blocked(SymbolId symbol) const { return unreachable.count(symbol) != 0; }
};

struct Plan {
    StateId start_state = 0;
    std::vector<SymbolId> symbols;
    Rational expected_probability = Rational::one(); // product of chosen transition probs
};

struct PlannerOptions {
    // Default: stop at the first accepting state entered. When set, an
    // accepting state with outgoing transitions is left whenever the best
    // admissible transition probability exceeds the state's termination
    // probability.
    bool prefer_terminal_mass = false;
    // Safety bound on execution loops driven by external environments.
    int max_commands = 1000;
};

// Greedy preference-following plan: from the current state repeatedly take
// the defined transition with the highest probability, lowest symbol id on
// ties, until an accepting state is reached. Availability constrains only the
// first step - the immediate action must be executable, while later steps
// assume availability recovers (re-planning handles it when it does not).
// Returns nullopt (stuck) when a non-accepting state offers no admissible
// transition.
std::optional<Plan> greedy_plan(const Pdfa& pdfa, StateId start, const AvailabilityView& avail,
                                const PlannerOptions& options = {});

// Highest-probability accepted word by exhaustive enumeration. Test and
// diagnostics helper; the planner contract is the greedy rule above.
Word best_word(const Pdfa& pdfa, std::size_t max_words = 1000000);

struct TraceEvent {
    enum class Kind { Planned, Achieved, Blocked, Replanned, Finished, Stuck };
    Kind kind = Kind::Planned;
    StateId state = 0;
    SymbolId symbol = -1;             // achieved / blocked
    int time = 0;                     // commands issued so far
    std::vector<SymbolId> plan;       // planned / replanned
};

struct ExecutionTrace {
    std::vector<TraceEvent> events;

    bool finished() const;
    StateId final_state() const;
    std::vector<SymbolId> achieved_word() const;
    int replan_count() const;
};

// Availability-and-achievement oracle. availability() reports the current
// view without advancing time; try_achieve() commands the low-level
// controller once and advances time whether or not it succeeds.
class ExecutionEnv {
public:
    virtual ~ExecutionEnv() = default;
    virtual AvailabilityView availability() = 0;
    virtual bool try_achieve(SymbolId symbol) = 0;
};

// Plan/act loop: observe availability; re-plan from the current state when
// the next planned sub-goal is unreachable; command the next sub-goal; on
// success advance the automaton state, on failure record a blocked event and
// re-plan with that sub-goal excluded once. Ends with a finished event at an
// accepting state or a stuck event when no admissible plan exists.
ExecutionTrace execute(const Pdfa& pdfa, ExecutionEnv& env, StateId start = 0,
                       const PlannerOptions& options = {});

const char* trace_event_name(TraceEvent::Kind kind);

// Line-delimited trace export: kind, state, symbol, time, plan.
void write_trace(std::ostream& out, const ExecutionTrace& trace);
// Plan export: symbol ids plus the expected probability.
void write_plan(std::ostream& out, const Plan& plan);

} // namespace taskspec

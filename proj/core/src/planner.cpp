#include "taskspec/planner.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <ostream>

#include "taskspec/errors.hpp"
#include "taskspec/wordgen.hpp"

namespace taskspec {
namespace {

struct Choice {
    SymbolId symbol;
    StateId target;
    Rational prob;
};

// Best admissible transition out of `state`: maximal probability, lowest
// symbol id on ties. Edges are stored sorted by symbol, so strictly-greater
// keeps the earliest maximum.
std::optional<Choice> best_transition(const Pdfa& pdfa, StateId state,
                                      const AvailabilityView* avail) {
    const auto& row = pdfa.dfa.edges[static_cast<std::size_t>(state)];
    std::optional<Choice> best;
    for (std::size_t k = 0; k < row.size(); ++k) {
        const auto [symbol, target] = row[k];
        if (avail != nullptr && avail->blocked(symbol)) {
            continue;
        }
        const Rational& prob = pdfa.edge_prob[static_cast<std::size_t>(state)][k];
        if (!best || prob > best->prob) {
            best = Choice{symbol, target, prob};
        }
    }
    return best;
}

} // namespace

std::optional<Plan> greedy_plan(const Pdfa& pdfa, StateId start, const AvailabilityView& avail,
                                const PlannerOptions& options) {
    if (start < 0 || start >= pdfa.dfa.state_count()) {
        throw DataError("greedy_plan: start state out of range");
    }
    Plan plan;
    plan.start_state = start;
    StateId state = start;
    bool first_step = true;
    while (true) {
        const bool is_accepting = pdfa.dfa.accepting[static_cast<std::size_t>(state)] != 0;
        const auto choice = best_transition(pdfa, state, first_step ? &avail : nullptr);
        if (is_accepting) {
            if (!options.prefer_terminal_mass || !choice ||
                !(choice->prob > pdfa.accept_prob[static_cast<std::size_t>(state)])) {
                return plan;
            }
        } else if (!choice) {
            return std::nullopt; // stuck
        }
        plan.symbols.push_back(choice->symbol);
        plan.expected_probability *= choice->prob;
        state = choice->target;
        first_step = false;
    }
}

Word best_word(const Pdfa& pdfa, std::size_t max_words) {
    const auto language = enumerate_language(pdfa.dfa, max_words);
    if (language.empty()) {
        throw DataError("best_word: empty language");
    }
    const Word* best = nullptr;
    Rational best_prob = Rational::zero();
    for (const Word& word : language) {
        const Rational prob = word_probability_exact(pdfa, word);
        if (best == nullptr || best_prob < prob) {
            best = &word;
            best_prob = prob;
        }
    }
    return *best;
}

bool ExecutionTrace::finished() const {
    return !events.empty() && events.back().kind == TraceEvent::Kind::Finished;
}

StateId ExecutionTrace::final_state() const {
    return events.empty() ? 0 : events.back().state;
}

std::vector<SymbolId> ExecutionTrace::achieved_word() const {
    std::vector<SymbolId> word;
    for (const TraceEvent& event : events) {
        if (event.kind == TraceEvent::Kind::Achieved) {
            word.push_back(event.symbol);
        }
    }
    return word;
}

int ExecutionTrace::replan_count() const {
    int count = 0;
    for (const TraceEvent& event : events) {
        if (event.kind == TraceEvent::Kind::Replanned) {
            ++count;
        }
    }
    return count;
}

ExecutionTrace execute(const Pdfa& pdfa, ExecutionEnv& env, StateId start,
                       const PlannerOptions& options) {
    ExecutionTrace trace;
    StateId state = start;
    int time = 0;

    auto emit = [&](TraceEvent::Kind kind, SymbolId symbol, std::vector<SymbolId> plan) {
        trace.events.push_back(TraceEvent{kind, state, symbol, time, std::move(plan)});
    };

    auto initial_plan = greedy_plan(pdfa, state, env.availability(), options);
    if (!initial_plan) {
        emit(TraceEvent::Kind::Stuck, -1, {});
        return trace;
    }
    emit(TraceEvent::Kind::Planned, -1, initial_plan->symbols);
    std::deque<SymbolId> pending(initial_plan->symbols.begin(), initial_plan->symbols.end());

    while (true) {
        if (pending.empty()) {
            // Greedy plans end exactly at accepting states.
            emit(TraceEvent::Kind::Finished, -1, {});
            return trace;
        }
        if (time >= options.max_commands) {
            throw DataError("execution exceeded the command limit of " +
                            std::to_string(options.max_commands));
        }
        const AvailabilityView avail = env.availability();
        SymbolId next = pending.front();
        if (avail.blocked(next)) {
            const auto replanned = greedy_plan(pdfa, state, avail, options);
            if (!replanned) {
                emit(TraceEvent::Kind::Stuck, -1, {});
                return trace;
            }
            emit(TraceEvent::Kind::Replanned, -1, replanned->symbols);
            pending.assign(replanned->symbols.begin(), replanned->symbols.end());
            if (pending.empty()) {
                emit(TraceEvent::Kind::Finished, -1, {});
                return trace;
            }
            next = pending.front();
        }

        const bool achieved = env.try_achieve(next);
        ++time;
        if (achieved) {
            const auto target = pdfa.dfa.next(state, next);
            if (!target) {
                throw DataError("environment achieved a sub-goal the automaton does not define");
            }
            state = *target;
            emit(TraceEvent::Kind::Achieved, next, {});
            pending.pop_front();
        } else {
            emit(TraceEvent::Kind::Blocked, next, {});
            // Exclude the failed sub-goal for this one re-plan, then let
            // later availability observations decide whether to retry it.
            AvailabilityView retry_view = avail;
            retry_view.unreachable.insert(next);
            const auto replanned = greedy_plan(pdfa, state, retry_view, options);
            if (!replanned) {
                emit(TraceEvent::Kind::Stuck, -1, {});
                return trace;
            }
            emit(TraceEvent::Kind::Replanned, -1, replanned->symbols);
            pending.assign(replanned->symbols.begin(), replanned->symbols.end());
        }
    }
}

const char* trace_event_name(TraceEvent::Kind kind) {
    switch (kind) {
    case TraceEvent::Kind::Planned:
        return "planned";
    case TraceEvent::Kind::Achieved:
        return "achieved";
    case TraceEvent::Kind::Blocked:
        return "blocked";
    case TraceEvent::Kind::Replanned:
        return "replanned";
    case TraceEvent::Kind::Finished:
        return "finished";
    case TraceEvent::Kind::Stuck:
        return "stuck";
    }
    return "unknown";
}

void write_trace(std::ostream& out, const ExecutionTrace& trace) {
    for (const TraceEvent& event : trace.events) {
        out << trace_event_name(event.kind) << '\t' << event.state << '\t';
        if (event.symbol >= 0) {
            out << event.symbol;
        } else {
            out << '-';
        }
        out << '\t' << event.time << '\t';
        if (event.kind == TraceEvent::Kind::Planned ||
            event.kind == TraceEvent::Kind::Replanned) {
            out << format_word(event.plan);
        } else {
            out << '-';
        }
        out << '\n';
    }
}

void write_plan(std::ostream& out, const Plan& plan) {
    char decimal[64];
    std::snprintf(decimal, sizeof(decimal), "%.17g", plan.expected_probability.to_double());
    out << "plan: " << format_word(plan.symbols) << '\n';
    out << "expected_probability: " << plan.expected_probability.str() << ' ' << decimal << '\n';
}

} // namespace taskspec

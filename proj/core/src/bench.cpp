#include "taskspec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "taskspec/automaton.hpp"
#include "taskspec/errors.hpp"
#include "taskspec/subgoals.hpp"
#include "taskspec/wordgen.hpp"

namespace taskspec {
namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double median_abs_deviation(const std::vector<double>& values, double center) {
    std::vector<double> deviations;
    deviations.reserve(values.size());
    for (double v : values) {
        deviations.push_back(std::abs(v - center));
    }
    return median(std::move(deviations));
}

// Per-call seconds; loops the callable until the total passes the floor so
// short stages are not lost in timer noise.
template <typename Fn>
double time_call(Fn&& fn, double min_measure_s) {
    std::size_t iterations = 1;
    while (true) {
        const auto start = Clock::now();
        for (std::size_t i = 0; i < iterations; ++i) {
            fn();
        }
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        if (elapsed.count() >= min_measure_s || iterations >= (std::size_t{1} << 22)) {
            return elapsed.count() / static_cast<double>(iterations);
        }
        const double target = min_measure_s * 1.2;
        const double per_call = std::max(elapsed.count() / static_cast<double>(iterations), 1e-9);
        iterations = std::max(iterations * 2, static_cast<std::size_t>(target / per_call) + 1);
    }
}

// Four blocks moved to designated spots, any order. The workhorse design for
// the demos and language axes; constraints shrink the ordering variety.
TaskScript placement_script(int object_count, std::vector<std::pair<int, int>> constraints,
                            double step_length) {
    TaskScript script;
    for (int i = 0; i < object_count; ++i) {
        SimObject object;
        object.name = "block" + std::to_string(i);
        object.initial = {static_cast<double>(i), 0.0, 0.0};
        script.objects.push_back(std::move(object));
    }
    for (int i = 0; i < object_count; ++i) {
        ScriptSubgoal sg;
        sg.object = i;
        sg.target = {static_cast<double>(i), 2.0, 0.5};
        sg.radius = 0.06;
        script.subgoals.push_back(sg);
    }
    script.constraints = std::move(constraints);
    script.motion.step_length = step_length;
    script.motion.dwell_steps = 3;
    script.motion.start_spread = 0.3;
    return script;
}

// Stack/unstack chain over three blocks: every level-of-|alphabet| design is a
// single forced ordering, so only the alphabet size varies.
TaskScript stacking_script(int subgoal_count) {
    TaskScript script;
    const int object_count = 3;
    for (int i = 0; i < object_count; ++i) {
        SimObject object;
        object.name = "block" + std::to_string(i);
        object.initial = {static_cast<double>(i), 0.0, 0.0};
        script.objects.push_back(std::move(object));
    }
    for (int g = 0; g < subgoal_count; ++g) {
        ScriptSubgoal sg;
        sg.object = g % object_count;
        const int round = g / object_count;
        sg.target = {static_cast<double>(g % object_count) + 0.2 * round, 2.0 + 1.5 * round,
                     0.3 * static_cast<double>(g % object_count)};
        sg.radius = 0.06;
        script.subgoals.push_back(sg);
        if (g > 0) {
            script.constraints.emplace_back(g - 1, g);
        }
    }
    script.motion.step_length = 0.5;
    script.motion.dwell_steps = 3;
    script.motion.start_spread = 0.3;
    return script;
}

// Four chained placements spread across `object_count` objects; objects
// beyond the fourth never move.
TaskScript objects_script(int object_count) {
    TaskScript script;
    for (int i = 0; i < object_count; ++i) {
        SimObject object;
        object.name = "block" + std::to_string(i);
        object.initial = {static_cast<double>(i), 0.0, 0.0};
        script.objects.push_back(std::move(object));
    }
    const int subgoal_count = 4;
    for (int g = 0; g < subgoal_count; ++g) {
        ScriptSubgoal sg;
        sg.object = g % object_count;
        const int round = g / object_count;
        sg.target = {static_cast<double>(g % object_count) + 0.3 * round, 2.0 + 1.5 * round, 0.5};
        sg.radius = 0.06;
        script.subgoals.push_back(sg);
        if (g > 0) {
            script.constraints.emplace_back(g - 1, g);
        }
    }
    script.motion.step_length = 0.5;
    script.motion.dwell_steps = 3;
    script.motion.start_spread = 0.3;
    return script;
}

std::vector<std::pair<int, int>> language_constraints(int language_size) {
    switch (language_size) {
    case 1:
        return {{0, 1}, {1, 2}, {2, 3}}; // total order
    case 2:
        return {{0, 1}, {1, 2}, {1, 3}}; // last two free
    case 6:
        return {{0, 1}, {2, 3}}; // two independent pairs
    case 24:
        return {};
    default:
        throw UsageError("language axis levels must be one of 1, 2, 6, 24");
    }
}

} // namespace

BenchAxis parse_bench_axis(const std::string& name) {
    if (name == "demos") {
        return BenchAxis::Demos;
    }
    if (name == "subgoals") {
        return BenchAxis::Subgoals;
    }
    if (name == "language") {
        return BenchAxis::Language;
    }
    if (name == "objects") {
        return BenchAxis::Objects;
    }
    throw UsageError("unknown bench axis '" + name +
                     "'; expected demos, subgoals, language or objects");
}

const char* bench_axis_name(BenchAxis axis) {
    switch (axis) {
    case BenchAxis::Demos:
        return "demos";
    case BenchAxis::Subgoals:
        return "subgoals";
    case BenchAxis::Language:
        return "language";
    case BenchAxis::Objects:
        return "objects";
    }
    return "unknown";
}

TaskScript bench_script(BenchAxis axis, int level) {
    switch (axis) {
    case BenchAxis::Demos:
        return placement_script(4, {}, 0.5);
    case BenchAxis::Subgoals:
        return stacking_script(level);
    case BenchAxis::Language:
        // Compact motion: the language axis runs a large fixed corpus so the
        // inference loop dominates its timing, and short trajectories keep
        // the quadratic clustering stage inside the bench budget.
        return placement_script(4, language_constraints(level), 3.0);
    case BenchAxis::Objects:
        return objects_script(level);
    }
    throw UsageError("unknown bench axis");
}

int bench_demo_count(BenchAxis axis, int level) {
    switch (axis) {
    case BenchAxis::Demos:
        return level;
    case BenchAxis::Subgoals:
    case BenchAxis::Objects:
        return 100;
    case BenchAxis::Language:
        return 1200;
    }
    return 0;
}

std::vector<BenchRow> scaling_bench(BenchAxis axis, const std::vector<int>& levels,
                                    const BenchOptions& options) {
    if (levels.empty()) {
        throw UsageError("bench needs at least one level");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) {
            throw UsageError("bench levels must be strictly increasing");
        }
    }
    if (levels.front() < 1) {
        throw UsageError("bench levels must be positive");
    }
    if (options.repetitions < 1) {
        throw UsageError("bench repetitions must be at least 1");
    }

    std::vector<BenchRow> rows;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const int level = levels[li];
        const TaskScript script = bench_script(axis, level);
        const int demo_count = bench_demo_count(axis, level);
        const Corpus corpus =
            generate_demos(script, demo_count, mix_seed(options.seed, li));
        const auto subsets = script.feature_subsets();

        std::vector<double> cluster_times;
        for (int rep = 0; rep < options.repetitions; ++rep) {
            cluster_times.push_back(time_call(
                [&] { (void)infer_subgoals(corpus, subsets); }, options.min_measure_s));
        }

        // Words come from the scripted sub-goals so the inference timing does
        // not depend on what clustering recovered; conversion stays untimed.
        const auto words = corpus_to_words(corpus, script.true_subgoals());
        const int symbol_count = static_cast<int>(script.subgoals.size());
        std::vector<double> pdfa_times;
        for (int rep = 0; rep < options.repetitions; ++rep) {
            pdfa_times.push_back(time_call(
                [&] {
                    auto inferred = infer_dfa(symbol_count, words);
                    (void)pdfa_from_counts(inferred.dfa, inferred.freq);
                },
                options.min_measure_s));
        }

        const double cluster_median = median(cluster_times);
        const double pdfa_median = median(pdfa_times);
        rows.push_back(BenchRow{level, "cluster", cluster_median,
                                median_abs_deviation(cluster_times, cluster_median)});
        rows.push_back(BenchRow{level, "pdfa", pdfa_median,
                                median_abs_deviation(pdfa_times, pdfa_median)});
    }
    return rows;
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "#level\tstage\tmedian_s\tmad_s\n";
    char buf[64];
    for (const BenchRow& row : rows) {
        out << row.level << '\t' << row.stage << '\t';
        std::snprintf(buf, sizeof(buf), "%.9f", row.median_s);
        out << buf << '\t';
        std::snprintf(buf, sizeof(buf), "%.9f", row.mad_s);
        out << buf << '\n';
    }
}

} // namespace taskspec

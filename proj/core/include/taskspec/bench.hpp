#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "taskspec/simulator.hpp"

namespace taskspec {

// Scaling harness: isolates one task property per axis and times the two
// pipeline stages separately.
//   demos    - four free-ordered placements, level = number of demonstrations
//   subgoals - stack/unstack chains over three blocks, level = |alphabet|
//   language - four placements under varying constraints, level = |language|
//              (valid levels: 1, 2, 6, 24), demonstration count fixed
//   objects  - four chained placements spread over level-many objects
enum class BenchAxis { Demos, Subgoals, Language, Objects };

BenchAxis parse_bench_axis(const std::string& name); // throws UsageError
const char* bench_axis_name(BenchAxis axis);

struct BenchRow {
    int level = 0;
    std::string stage; // "cluster" or "pdfa"
    double median_s = 0.0;
    double mad_s = 0.0;
};

struct BenchOptions {
    int repetitions = 3;
    std::uint64_t seed = 1;
    // Stages faster than this are repeated in a timed loop and averaged, so
    // median comparisons stay meaningful at microsecond scales.
    double min_measure_s = 0.02;
};

// Runs the axis design at each level: builds the corpus (untimed), times
// sub-goal clustering, then times automaton inference on words converted with
// the scripted ground-truth sub-goals (conversion untimed, keeping the two
// timed stages independent). Levels must be strictly increasing.
std::vector<BenchRow> scaling_bench(BenchAxis axis, const std::vector<int>& levels,
                                    const BenchOptions& options = {});

// Tab-separated: level, stage, median seconds, median absolute deviation.
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

// The experiment design behind each (axis, level); exposed for tests.
TaskScript bench_script(BenchAxis axis, int level);
int bench_demo_count(BenchAxis axis, int level);

} // namespace taskspec

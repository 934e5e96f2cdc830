#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "taskspec/planner.hpp"
#include "taskspec/trace.hpp"

namespace taskspec {

// Synthetic stand-in for the tabletop experiments: objects with 3D positions
// (or absent, i.e. undetected), scripted target balls with ordering
// constraints and preference weights, sensor-style noise.

struct SimObject {
    std::string name;
    std::array<double, 3> initial{0.0, 0.0, 0.0};
};

// Current object positions; nullopt marks an absent (undetected) object,
// whose features observe as undefined.
struct BlockWorld {
    std::vector<std::optional<std::array<double, 3>>> positions;
    std::uint64_t seed = 0;
};

struct ScriptSubgoal {
    int object = 0;
    std::array<double, 3> target{0.0, 0.0, 0.0};
    double radius = 0.05;
};

struct NoiseParams {
    double sigma = 0.0;   // per-step positional jitter on all coordinates
    double dropout = 0.0; // per-object, per-step detection dropout probability
};

struct MotionParams {
    double step_length = 0.25; // nominal straight-line travel step in raw units
    int dwell_steps = 3;       // states emitted inside each target ball
    double start_spread = 0.3; // per-demo uniform scatter of start positions
    // Per-step speed variation along the path as a fraction of one step,
    // in [0, 0.5). Without it every demonstration samples the line at the
    // same arc positions and those samples pile up into phantom density
    // shells that clustering mistakes for sub-goals.
    double speed_jitter = 0.4;
};

// Time-indexed absence: entry at time t applies from t until the next entry.
struct ScheduleEntry {
    int time = 0;
    std::vector<int> absent_objects;
};

struct AvailabilitySchedule {
    std::vector<ScheduleEntry> entries; // sorted by time

    std::vector<int> absent_at(int time) const;
};

struct OrderingWeight {
    std::vector<int> order;
    double weight = 1.0;
};

struct TaskScript {
    std::vector<SimObject> objects;
    std::vector<ScriptSubgoal> subgoals;
    std::vector<std::pair<int, int>> constraints; // (before, after) sub-goal pairs
    double default_weight = 1.0;                  // weight of unlisted orderings
    std::vector<OrderingWeight> weight_overrides;
    NoiseParams noise;
    MotionParams motion;
    AvailabilitySchedule schedule;

    std::size_t feature_count() const { return 3 * objects.size(); }
    std::vector<std::string> feature_names() const;
    std::vector<FeatureSubset> feature_subsets() const; // one per object
    std::vector<SubGoal> true_subgoals() const;         // scripted ground truth
};

void validate_script(const TaskScript& script);

TaskScript load_script(const std::filesystem::path& path);
TaskScript parse_script(std::istream& in, const std::string& origin);
void write_script(const std::filesystem::path& path, const TaskScript& script);

AvailabilitySchedule load_schedule(const std::filesystem::path& path);
AvailabilitySchedule parse_schedule(std::istream& in, const std::string& origin);

// All orderings compatible with the constraints, lexicographic by symbol id.
// Throws when the constraint graph is cyclic or the count exceeds the cap.
std::vector<std::vector<int>> enumerate_extensions(const TaskScript& script,
                                                   std::size_t cap = 200000);
double extension_weight(const TaskScript& script, const std::vector<int>& extension);

// Noisy sensor snapshot of the world: per-object detection dropout plus
// Gaussian jitter on every coordinate. Absent objects observe as undefined.
WorldState observe_world(const BlockWorld& world, const NoiseParams& noise,
                         std::mt19937_64& rng);

// One demonstration following `ordering`: objects start at their scripted
// positions scattered per-demo, move one at a time along straight lines at
// fixed step length, then dwell inside the target ball. Jitter and dropout
// apply to every emitted state. Deterministic given the seed.
Demonstration generate_demo(const TaskScript& script, const std::vector<int>& ordering,
                            std::uint64_t seed);

// Samples an ordering per demonstration according to the preference weights.
Corpus generate_demos(const TaskScript& script, int count, std::uint64_t seed);

// Deterministic corpus with a fixed number of demonstrations per ordering,
// aligned with enumerate_extensions order.
Corpus generate_demos_by_counts(const TaskScript& script, const std::vector<int>& counts,
                                std::uint64_t seed);

// Sub-goals are unreachable exactly while their object is absent.
AvailabilityView availability_at(const AvailabilitySchedule& schedule, int time,
                                 const std::vector<SubGoal>& goals);

// Planner environment over a schedule. Commands advance time by one step;
// achieving a sub-goal succeeds whenever its object is present, unless a
// scripted failure (time, symbol) is injected.
class SimEnv : public ExecutionEnv {
public:
    SimEnv(AvailabilitySchedule schedule, std::vector<SubGoal> goals);

    void fail_command_at(int time, SymbolId symbol);

    AvailabilityView availability() override;
    bool try_achieve(SymbolId symbol) override;

    int time() const { return time_; }

private:
    AvailabilitySchedule schedule_;
    std::vector<SubGoal> goals_;
    std::vector<std::pair<int, SymbolId>> scripted_failures_;
    int time_ = 0;
};

// Deterministic per-stream RNG helpers shared by the simulator and the
// bench harness (splitmix64 keying into mt19937_64).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace taskspec

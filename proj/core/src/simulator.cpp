#include "taskspec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <random>

#include <json.hpp>

#include "taskspec/errors.hpp"

namespace taskspec {
namespace {

using nlohmann::json;

// Uniform double in [0, 1) from the top 53 bits; keeps draws identical across
// standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller; one draw per call is plenty here.
double normal(std::mt19937_64& rng, double sigma) {
    if (sigma <= 0.0) {
        return 0.0;
    }
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<int> AvailabilitySchedule::absent_at(int time) const {
    std::vector<int> absent;
    for (const ScheduleEntry& entry : entries) {
        if (entry.time <= time) {
            absent = entry.absent_objects;
        } else {
            break;
        }
    }
    return absent;
}

std::vector<std::string> TaskScript::feature_names() const {
    static const char* axis[3] = {"x", "y", "z"};
    std::vector<std::string> names;
    for (const SimObject& object : objects) {
        for (int k = 0; k < 3; ++k) {
            names.push_back(object.name + "_" + axis[k]);
        }
    }
    return names;
}

std::vector<FeatureSubset> TaskScript::feature_subsets() const {
    std::vector<FeatureSubset> subsets;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        FeatureSubset subset;
        subset.id = static_cast<int>(i);
        subset.indices = {static_cast<int>(3 * i), static_cast<int>(3 * i + 1),
                          static_cast<int>(3 * i + 2)};
        subsets.push_back(std::move(subset));
    }
    return subsets;
}

std::vector<SubGoal> TaskScript::true_subgoals() const {
    std::vector<SubGoal> goals;
    for (std::size_t g = 0; g < subgoals.size(); ++g) {
        const ScriptSubgoal& sg = subgoals[g];
        SubGoal goal;
        goal.symbol_id = static_cast<int>(g);
        goal.subset_id = sg.object;
        goal.indices = {3 * sg.object, 3 * sg.object + 1, 3 * sg.object + 2};
        goal.center = {sg.target[0], sg.target[1], sg.target[2]};
        goal.radius = sg.radius;
        goals.push_back(std::move(goal));
    }
    return goals;
}

void validate_script(const TaskScript& script) {
    if (script.objects.empty()) {
        throw DataError("task script declares no objects");
    }
    if (script.subgoals.empty()) {
        throw DataError("task script declares no sub-goals");
    }
    if (script.subgoals.size() > 64) {
        throw DataError("task script declares more than 64 sub-goals");
    }
    for (const ScriptSubgoal& sg : script.subgoals) {
        if (sg.object < 0 || static_cast<std::size_t>(sg.object) >= script.objects.size()) {
            throw DataError("sub-goal references unknown object " + std::to_string(sg.object));
        }
        if (!(sg.radius > 0.0)) {
            throw DataError("sub-goal radius must be positive");
        }
    }
    const int n = static_cast<int>(script.subgoals.size());
    for (const auto& [before, after] : script.constraints) {
        if (before < 0 || before >= n || after < 0 || after >= n || before == after) {
            throw DataError("constraint references invalid sub-goals");
        }
    }
    if (script.default_weight < 0.0) {
        throw DataError("default ordering weight must be nonnegative");
    }
    for (const OrderingWeight& w : script.weight_overrides) {
        if (w.weight < 0.0) {
            throw DataError("ordering weights must be nonnegative");
        }
    }
    if (!(script.motion.step_length > 0.0) || script.motion.dwell_steps < 1 ||
        script.motion.speed_jitter < 0.0 || script.motion.speed_jitter >= 0.5) {
        throw DataError("motion parameters out of range");
    }
    if (script.noise.sigma < 0.0 || script.noise.dropout < 0.0 || script.noise.dropout >= 1.0) {
        throw DataError("noise parameters out of range");
    }
}

std::vector<std::vector<int>> enumerate_extensions(const TaskScript& script, std::size_t cap) {
    const int n = static_cast<int>(script.subgoals.size());
    std::vector<std::vector<int>> after(n);
    std::vector<int> indegree(n, 0);
    for (const auto& [before, later] : script.constraints) {
        after[static_cast<std::size_t>(before)].push_back(later);
        ++indegree[static_cast<std::size_t>(later)];
    }

    std::vector<std::vector<int>> extensions;
    std::vector<int> current;
    std::vector<bool> used(n, false);
    std::vector<int> remaining_indegree = indegree;

    auto backtrack = [&](auto&& self) -> void {
        if (current.size() == static_cast<std::size_t>(n)) {
            if (extensions.size() >= cap) {
                throw DataError("ordering enumeration exceeded the cap of " +
                                std::to_string(cap));
            }
            extensions.push_back(current);
            return;
        }
        for (int s = 0; s < n; ++s) {
            if (used[static_cast<std::size_t>(s)] ||
                remaining_indegree[static_cast<std::size_t>(s)] != 0) {
                continue;
            }
            used[static_cast<std::size_t>(s)] = true;
            current.push_back(s);
            for (int nxt : after[static_cast<std::size_t>(s)]) {
                --remaining_indegree[static_cast<std::size_t>(nxt)];
            }
            self(self);
            for (int nxt : after[static_cast<std::size_t>(s)]) {
                ++remaining_indegree[static_cast<std::size_t>(nxt)];
            }
            current.pop_back();
            used[static_cast<std::size_t>(s)] = false;
        }
    };
    backtrack(backtrack);

    if (extensions.empty()) {
        throw DataError("ordering constraints admit no valid sequence (cycle?)");
    }
    return extensions;
}

double extension_weight(const TaskScript& script, const std::vector<int>& extension) {
    for (const OrderingWeight& w : script.weight_overrides) {
        if (w.order == extension) {
            return w.weight;
        }
    }
    return script.default_weight;
}

WorldState observe_world(const BlockWorld& world, const NoiseParams& noise,
                         std::mt19937_64& rng) {
    WorldState state;
    state.values.reserve(3 * world.positions.size());
    for (const auto& position : world.positions) {
        const bool dropped =
            !position || (noise.dropout > 0.0 && uniform01(rng) < noise.dropout);
        for (int k = 0; k < 3; ++k) {
            if (dropped) {
                state.values.push_back(std::nullopt);
            } else {
                state.values.push_back((*position)[static_cast<std::size_t>(k)] +
                                       normal(rng, noise.sigma));
            }
        }
    }
    return state;
}

Demonstration generate_demo(const TaskScript& script, const std::vector<int>& ordering,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);

    BlockWorld world;
    world.seed = seed;
    world.positions.resize(script.objects.size());
    for (std::size_t i = 0; i < script.objects.size(); ++i) {
        std::array<double, 3> p;
        for (int k = 0; k < 3; ++k) {
            p[static_cast<std::size_t>(k)] =
                script.objects[i].initial[static_cast<std::size_t>(k)] +
                uniform_range(rng, -script.motion.start_spread, script.motion.start_spread);
        }
        world.positions[i] = p;
    }

    Demonstration demo;
    auto emit_state = [&]() { demo.states.push_back(observe_world(world, script.noise, rng)); };

    // The opening observation registers every object: downstream filtering
    // anchors on first states, so detection dropout starts at t=1.
    NoiseParams initial_noise = script.noise;
    initial_noise.dropout = 0.0;
    demo.states.push_back(observe_world(world, initial_noise, rng));

    for (int goal : ordering) {
        const ScriptSubgoal& sg = script.subgoals[static_cast<std::size_t>(goal)];
        const auto obj = static_cast<std::size_t>(sg.object);
        const std::array<double, 3> from = *world.positions[obj];
        const std::array<double, 3>& to = sg.target;
        const double dist = std::sqrt((to[0] - from[0]) * (to[0] - from[0]) +
                                      (to[1] - from[1]) * (to[1] - from[1]) +
                                      (to[2] - from[2]) * (to[2] - from[2]));
        const int steps =
            std::max(1, static_cast<int>(std::ceil(dist / script.motion.step_length)));
        for (int s = 1; s <= steps; ++s) {
            // Jitter below half a step keeps the samples strictly ordered and
            // the final step lands exactly on the target.
            double a = static_cast<double>(s) / steps;
            if (s < steps && script.motion.speed_jitter > 0.0) {
                a = (s + script.motion.speed_jitter * uniform_range(rng, -1.0, 1.0)) / steps;
            }
            std::array<double, 3> p;
            for (int k = 0; k < 3; ++k) {
                p[static_cast<std::size_t>(k)] =
                    from[static_cast<std::size_t>(k)] +
                    a * (to[static_cast<std::size_t>(k)] - from[static_cast<std::size_t>(k)]);
            }
            world.positions[obj] = p;
            emit_state();
        }
        for (int s = 0; s < script.motion.dwell_steps; ++s) {
            emit_state();
        }
    }
    return demo;
}

namespace {

Corpus assemble_corpus(const TaskScript& script, const std::vector<std::vector<int>>& orderings,
                       std::uint64_t seed) {
    Corpus corpus;
    corpus.feature_count = script.feature_count();
    corpus.feature_names = script.feature_names();
    corpus.demos.resize(orderings.size());

    // Per-demonstration seeds keep generation parallel yet reproducible.
    const std::size_t workers = orderings.size() > 8 ? 4 : 1;
    if (workers > 1) {
        std::vector<std::future<void>> futures;
        const std::size_t chunk = (orderings.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(orderings.size(), begin + chunk);
            futures.push_back(std::async(std::launch::async, [&, begin, end] {
                for (std::size_t i = begin; i < end; ++i) {
                    corpus.demos[i] = generate_demo(script, orderings[i], mix_seed(seed, i));
                }
            }));
        }
        for (auto& f : futures) {
            f.get();
        }
    } else {
        for (std::size_t i = 0; i < orderings.size(); ++i) {
            corpus.demos[i] = generate_demo(script, orderings[i], mix_seed(seed, i));
        }
    }
    return corpus;
}

} // namespace

Corpus generate_demos(const TaskScript& script, int count, std::uint64_t seed) {
    if (count < 1) {
        throw DataError("demonstration count must be at least 1");
    }
    validate_script(script);
    const auto extensions = enumerate_extensions(script);

    std::vector<double> weights;
    weights.reserve(extensions.size());
    double total = 0.0;
    for (const auto& ext : extensions) {
        const double w = extension_weight(script, ext);
        weights.push_back(w);
        total += w;
    }
    if (!(total > 0.0)) {
        throw DataError("ordering weights sum to zero");
    }

    std::mt19937_64 rng(mix_seed(seed, 0x5eed));
    std::vector<std::vector<int>> orderings;
    orderings.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double u = uniform01(rng) * total;
        std::size_t pick = extensions.size() - 1;
        for (std::size_t e = 0; e < extensions.size(); ++e) {
            if (u < weights[e]) {
                pick = e;
                break;
            }
            u -= weights[e];
        }
        orderings.push_back(extensions[pick]);
    }
    return assemble_corpus(script, orderings, seed);
}

Corpus generate_demos_by_counts(const TaskScript& script, const std::vector<int>& counts,
                                std::uint64_t seed) {
    validate_script(script);
    const auto extensions = enumerate_extensions(script);
    if (counts.size() != extensions.size()) {
        throw DataError("per-ordering counts do not match the number of valid orderings (" +
                        std::to_string(extensions.size()) + ")");
    }
    std::vector<std::vector<int>> orderings;
    for (std::size_t e = 0; e < extensions.size(); ++e) {
        for (int i = 0; i < counts[e]; ++i) {
            orderings.push_back(extensions[e]);
        }
    }
    if (orderings.empty()) {
        throw DataError("per-ordering counts are all zero");
    }
    return assemble_corpus(script, orderings, seed);
}

AvailabilityView availability_at(const AvailabilitySchedule& schedule, int time,
                                 const std::vector<SubGoal>& goals) {
    AvailabilityView view;
    const std::vector<int> absent = schedule.absent_at(time);
    for (const SubGoal& goal : goals) {
        if (std::find(absent.begin(), absent.end(), goal.subset_id) != absent.end()) {
            view.unreachable.insert(goal.symbol_id);
        }
    }
    return view;
}

SimEnv::SimEnv(AvailabilitySchedule schedule, std::vector<SubGoal> goals)
    : schedule_(std::move(schedule)), goals_(std::move(goals)) {}

void SimEnv::fail_command_at(int time, SymbolId symbol) {
    scripted_failures_.emplace_back(time, symbol);
}

AvailabilityView SimEnv::availability() {
    return availability_at(schedule_, time_, goals_);
}

bool SimEnv::try_achieve(SymbolId symbol) {
    const AvailabilityView view = availability_at(schedule_, time_, goals_);
    const bool scripted_failure =
        std::find(scripted_failures_.begin(), scripted_failures_.end(),
                  std::make_pair(time_, symbol)) != scripted_failures_.end();
    ++time_;
    return !view.blocked(symbol) && !scripted_failure;
}

namespace {

std::array<double, 3> parse_vec3(const json& node, const std::string& origin) {
    if (!node.is_array() || node.size() != 3) {
        throw DataError(origin + ": expected a 3-element coordinate array");
    }
    return {node[0].get<double>(), node[1].get<double>(), node[2].get<double>()};
}

AvailabilitySchedule parse_schedule_node(const json& node, const std::string& origin) {
    AvailabilitySchedule schedule;
    for (const auto& entry : node) {
        ScheduleEntry e;
        e.time = entry.at("time").get<int>();
        if (entry.contains("absent")) {
            e.absent_objects = entry.at("absent").get<std::vector<int>>();
        }
        schedule.entries.push_back(std::move(e));
    }
    std::sort(schedule.entries.begin(), schedule.entries.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < schedule.entries.size(); ++i) {
        if (schedule.entries[i].time == schedule.entries[i - 1].time) {
            throw DataError(origin + ": duplicate schedule time " +
                            std::to_string(schedule.entries[i].time));
        }
    }
    return schedule;
}

} // namespace

TaskScript parse_script(std::istream& in, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid task script: " + e.what());
    }

    TaskScript script;
    try {
        for (const auto& node : doc.at("objects")) {
            SimObject object;
            object.name = node.at("name").get<std::string>();
            object.initial = parse_vec3(node.at("initial"), origin);
            script.objects.push_back(std::move(object));
        }
        for (const auto& node : doc.at("subgoals")) {
            ScriptSubgoal sg;
            sg.object = node.at("object").get<int>();
            sg.target = parse_vec3(node.at("target"), origin);
            sg.radius = node.value("radius", 0.05);
            script.subgoals.push_back(sg);
        }
        if (doc.contains("constraints")) {
            for (const auto& node : doc.at("constraints")) {
                if (!node.is_array() || node.size() != 2) {
                    throw DataError(origin + ": constraints must be [before, after] pairs");
                }
                script.constraints.emplace_back(node[0].get<int>(), node[1].get<int>());
            }
        }
        script.default_weight = doc.value("default_weight", 1.0);
        if (doc.contains("weights")) {
            for (const auto& node : doc.at("weights")) {
                OrderingWeight w;
                w.order = node.at("order").get<std::vector<int>>();
                w.weight = node.at("weight").get<double>();
                script.weight_overrides.push_back(std::move(w));
            }
        }
        if (doc.contains("noise")) {
            script.noise.sigma = doc.at("noise").value("sigma", 0.0);
            script.noise.dropout = doc.at("noise").value("dropout", 0.0);
        }
        if (doc.contains("motion")) {
            script.motion.step_length = doc.at("motion").value("step_length", 0.25);
            script.motion.dwell_steps = doc.at("motion").value("dwell_steps", 3);
            script.motion.start_spread = doc.at("motion").value("start_spread", 0.3);
            script.motion.speed_jitter = doc.at("motion").value("speed_jitter", 0.4);
        }
        if (doc.contains("schedule")) {
            script.schedule = parse_schedule_node(doc.at("schedule"), origin);
        }
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid task script: " + e.what());
    }

    validate_script(script);
    // Weight overrides must name valid orderings.
    const auto extensions = enumerate_extensions(script);
    for (const OrderingWeight& w : script.weight_overrides) {
        if (std::find(extensions.begin(), extensions.end(), w.order) == extensions.end()) {
            throw DataError(origin + ": weight override names an ordering that violates the constraints");
        }
    }
    return script;
}

TaskScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open task script " + path.string());
    }
    return parse_script(in, path.string());
}

void write_script(const std::filesystem::path& path, const TaskScript& script) {
    json doc;
    doc["objects"] = json::array();
    for (const SimObject& object : script.objects) {
        doc["objects"].push_back({{"name", object.name}, {"initial", object.initial}});
    }
    doc["subgoals"] = json::array();
    for (const ScriptSubgoal& sg : script.subgoals) {
        doc["subgoals"].push_back(
            {{"object", sg.object}, {"target", sg.target}, {"radius", sg.radius}});
    }
    doc["constraints"] = json::array();
    for (const auto& [before, after] : script.constraints) {
        doc["constraints"].push_back({before, after});
    }
    doc["default_weight"] = script.default_weight;
    doc["weights"] = json::array();
    for (const OrderingWeight& w : script.weight_overrides) {
        doc["weights"].push_back({{"order", w.order}, {"weight", w.weight}});
    }
    doc["noise"] = {{"sigma", script.noise.sigma}, {"dropout", script.noise.dropout}};
    doc["motion"] = {{"step_length", script.motion.step_length},
                     {"dwell_steps", script.motion.dwell_steps},
                     {"start_spread", script.motion.start_spread},
                     {"speed_jitter", script.motion.speed_jitter}};
    doc["schedule"] = json::array();
    for (const ScheduleEntry& entry : script.schedule.entries) {
        doc["schedule"].push_back({{"time", entry.time}, {"absent", entry.absent_objects}});
    }

    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write task script " + path.string());
    }
    out << doc.dump(2) << "\n";
}

AvailabilitySchedule parse_schedule(std::istream& in, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid schedule: " + e.what());
    }
    try {
        if (doc.is_array()) {
            return parse_schedule_node(doc, origin);
        }
        return parse_schedule_node(doc.at("schedule"), origin);
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid schedule: " + e.what());
    }
}

AvailabilitySchedule load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open schedule file " + path.string());
    }
    return parse_schedule(in, path.string());
}

} // namespace taskspec

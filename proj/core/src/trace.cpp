#include "taskspec/trace.hpp"

#include <cmath>

#include "taskspec/errors.hpp"

namespace taskspec {

std::size_t Corpus::state_count() const {
    std::size_t n = 0;
    for (const auto& d : demos) {
        n += d.states.size();
    }
    return n;
}

void validate_state(const WorldState& state, std::size_t feature_count) {
    if (state.values.size() != feature_count) {
        throw DataError("world state has " + std::to_string(state.values.size()) +
                        " features, expected " + std::to_string(feature_count));
    }
    for (std::size_t i = 0; i < state.values.size(); ++i) {
        if (state.values[i] && !std::isfinite(*state.values[i])) {
            throw DataError("feature " + std::to_string(i) +
                            " is not finite; use undef for missing values");
        }
    }
}

void validate_subset(const FeatureSubset& subset, std::size_t feature_count) {
    if (subset.indices.empty()) {
        throw DataError("feature subset " + std::to_string(subset.id) + " is empty");
    }
    int prev = -1;
    for (int idx : subset.indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= feature_count) {
            throw DataError("feature subset " + std::to_string(subset.id) +
                            " references feature " + std::to_string(idx) +
                            " outside the declared dimension " +
                            std::to_string(feature_count));
        }
        if (idx <= prev) {
            throw DataError("feature subset " + std::to_string(subset.id) +
                            " indices must be strictly increasing");
        }
        prev = idx;
    }
}

void validate_subgoal(const SubGoal& goal) {
    if (goal.radius <= 0.0 || !std::isfinite(goal.radius)) {
        throw DataError("sub-goal " + std::to_string(goal.symbol_id) +
                        " has non-positive radius");
    }
    if (goal.center.size() != goal.indices.size() || goal.indices.empty()) {
        throw DataError("sub-goal " + std::to_string(goal.symbol_id) +
                        " center dimension does not match its subspace");
    }
    for (double c : goal.center) {
        if (!std::isfinite(c)) {
            throw DataError("sub-goal " + std::to_string(goal.symbol_id) +
                            " center is not finite");
        }
    }
}

std::optional<std::vector<double>> project_values(const std::vector<int>& indices,
                                                  const WorldState& state) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (int idx : indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= state.values.size()) {
            throw DataError("projection index " + std::to_string(idx) +
                            " out of range for state of dimension " +
                            std::to_string(state.values.size()));
        }
        const Feature& f = state.values[static_cast<std::size_t>(idx)];
        if (!f) {
            return std::nullopt;
        }
        out.push_back(*f);
    }
    return out;
}

std::optional<PartialState> project(const FeatureSubset& subset, const WorldState& state) {
    auto values = project_values(subset.indices, state);
    if (!values) {
        return std::nullopt;
    }
    return PartialState{subset.id, std::move(*values)};
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

bool satisfies(const SubGoal& goal, const WorldState& state, double radius) {
    auto values = project_values(goal.indices, state);
    if (!values) {
        return false;
    }
    return euclidean_distance(*values, goal.center) <= radius;
}

bool satisfies(const SubGoal& goal, const WorldState& state) {
    return satisfies(goal, state, goal.radius);
}

} // namespace taskspec

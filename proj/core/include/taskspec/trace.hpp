#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace taskspec {

// A feature is either a finite real or "undefined" (object not detected).
// Undefined is an explicit marker, never a sentinel number; NaN and
// infinities are rejected at load/generation time.
using Feature = std::optional<double>;

struct WorldState {
    std::vector<Feature> values;

    std::size_t size() const { return values.size(); }
    bool defined(std::size_t i) const { return values[i].has_value(); }
};

struct Demonstration {
    std::vector<WorldState> states;

    std::size_t duration() const { return states.size(); }
};

// A demonstration corpus with a fixed feature dimension. Feature names are
// metadata only; all algorithms address features by position.
struct Corpus {
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names;
    std::vector<Demonstration> demos;

    std::size_t state_count() const;
};

// A candidate feature subspace: strictly increasing positions into the
// world-state vector, plus a stable ordinal among the candidates.
struct FeatureSubset {
    int id = 0;
    std::vector<int> indices;

    std::size_t dim() const { return indices.size(); }
};

struct PartialState {
    int subset_id = 0;
    std::vector<double> values;
};

// A closed Euclidean ball in one feature subspace. The subspace positions are
// stored inline so membership tests need no side lookup.
struct SubGoal {
    int symbol_id = 0;
    int subset_id = 0;
    std::vector<int> indices;
    std::vector<double> center;
    double radius = 0.0;
};

// Structural validation; throws DataError on violation.
void validate_state(const WorldState& state, std::size_t feature_count);
void validate_subset(const FeatureSubset& subset, std::size_t feature_count);
void validate_subgoal(const SubGoal& goal);

// Extracts the selected components in subset order; nullopt when any selected
// feature is undefined. Out-of-range indices are a structural error.
std::optional<PartialState> project(const FeatureSubset& subset, const WorldState& state);
std::optional<std::vector<double>> project_values(const std::vector<int>& indices,
                                                  const WorldState& state);

// Closed-ball membership: true iff the projection is defined and its
// Euclidean distance to the center is <= radius. The comparison is exact;
// the radius itself is the tolerance knob.
bool satisfies(const SubGoal& goal, const WorldState& state);
bool satisfies(const SubGoal& goal, const WorldState& state, double radius);

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

} // namespace taskspec

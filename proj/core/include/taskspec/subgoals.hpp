#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "taskspec/trace.hpp"

namespace taskspec {

// DBSCAN parameters. eps is interpreted in min-max normalized feature units.
// min_pts <= 0 selects the corpus-size default max(2, ceil(0.5 * |D|)), which
// requires a candidate region to show up in roughly half the demonstrations.
struct DbscanParams {
    double eps = 0.05;
    int min_pts = 0;
};

// Ball radius attached to each discovered cluster. Fixed is the default: a
// single task-level radius in raw feature units. MaxMember derives the radius
// from the cluster spread, floored at eps (mapped to raw units).
struct RadiusPolicy {
    enum class Kind { Fixed, MaxMember };
    Kind kind = Kind::Fixed;
    double fixed_radius = 0.05;

    static RadiusPolicy fixed(double r) { return RadiusPolicy{Kind::Fixed, r}; }
    static RadiusPolicy max_member() { return RadiusPolicy{Kind::MaxMember, 0.0}; }
};

// All projections of corpus states onto one candidate subspace, in raw units.
// States with an undefined selected feature are omitted.
struct PartialDataset {
    int subset_id = 0;
    std::size_t dim = 0;
    std::vector<double> points;                  // row-major, dim * size()
    std::vector<std::pair<int, int>> provenance; // (demo, time) per row

    std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
    const double* row(std::size_t i) const { return points.data() + i * dim; }
};

// Per-feature min-max bounds over the defined values of a corpus. Dimensions
// with no spread (or no defined values) normalize with scale 1 so eps keeps a
// meaning there.
struct NormalizationBounds {
    std::vector<double> mins;
    std::vector<double> maxs;

    std::size_t size() const { return mins.size(); }
    double scale(std::size_t dim) const {
        const double s = maxs[dim] - mins[dim];
        return s > 0.0 ? s : 1.0;
    }
    double normalize(std::size_t dim, double v) const {
        return (v - mins[dim]) / scale(dim);
    }
};

NormalizationBounds compute_bounds(const Corpus& corpus);

std::vector<PartialDataset> build_partial_datasets(const Corpus& corpus,
                                                   const std::vector<FeatureSubset>& subsets);

inline constexpr int kNoise = -1;

// Standard DBSCAN over flat row-major points with the Euclidean metric.
// A point is core iff at least min_pts points (itself included) lie within
// eps. Labels are deterministic: clusters are seeded in input order and
// border points go to the first claiming cluster. Plain O(N^2) neighbor
// queries; at the corpus sizes this tool targets that is the dominant cost
// and grows quadratically with the number of demonstrations.
std::vector<int> dbscan(const std::vector<double>& points, std::size_t dim,
                        const DbscanParams& params);

struct Cluster {
    int subset_id = 0;
    std::vector<std::size_t> members; // row indices into the source dataset
    std::vector<double> center;       // raw units, mean of members
    double radius = 0.0;              // raw units, per the radius policy
};

// Groups labeled rows into clusters and attaches ball geometry in raw units.
// dim_scales carries the normalization scale of each subspace dimension so
// the eps floor of the max-member policy maps back to raw units.
std::vector<Cluster> build_clusters(const PartialDataset& dataset,
                                    const std::vector<int>& labels,
                                    const RadiusPolicy& policy,
                                    const std::vector<double>& dim_scales,
                                    double eps);

// Drops every cluster whose ball contains the projection of any
// demonstration's first state (closed-ball test).
std::vector<Cluster> filter_initial(std::vector<Cluster> clusters, const Corpus& corpus,
                                    const std::vector<FeatureSubset>& subsets);

// One sub-goal per surviving cluster; symbols are assigned by
// (subset_id, lexicographic center) so runs are reproducible.
std::vector<SubGoal> clusters_to_subgoals(const std::vector<Cluster>& clusters,
                                          const std::vector<FeatureSubset>& subsets);

struct SubgoalModel {
    std::vector<SubGoal> subgoals;
    std::vector<std::size_t> member_counts; // aligned with subgoals
    NormalizationBounds bounds;
    DbscanParams params; // min_pts resolved
    RadiusPolicy policy;
};

// Full discovery pipeline: normalize, cluster each candidate subspace
// (subspaces run in parallel), filter clusters at initial states, assign
// symbols.
SubgoalModel infer_subgoals(const Corpus& corpus, const std::vector<FeatureSubset>& subsets,
                            DbscanParams params = {}, RadiusPolicy policy = {});

int resolve_min_pts(const DbscanParams& params, std::size_t demo_count);

// Sub-goal set file: symbol id, subset indices, center (raw units), radius,
// member count, plus the normalization bounds the model was built with.
void write_subgoal_set(std::ostream& out, const SubgoalModel& model);
void write_subgoal_set(const std::filesystem::path& path, const SubgoalModel& model);
SubgoalModel read_subgoal_set(std::istream& in, const std::string& origin);
SubgoalModel read_subgoal_set(const std::filesystem::path& path);

} // namespace taskspec

#include "taskspec/subgoals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "taskspec/errors.hpp"

namespace taskspec {
namespace {

double sq_distance(const double* a, const double* b, std::size_t dim) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
    }
    return sq;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

NormalizationBounds compute_bounds(const Corpus& corpus) {
    NormalizationBounds bounds;
    bounds.mins.assign(corpus.feature_count, std::numeric_limits<double>::infinity());
    bounds.maxs.assign(corpus.feature_count, -std::numeric_limits<double>::infinity());
    for (const auto& demo : corpus.demos) {
        for (const auto& state : demo.states) {
            for (std::size_t i = 0; i < corpus.feature_count; ++i) {
                if (state.values[i]) {
                    bounds.mins[i] = std::min(bounds.mins[i], *state.values[i]);
                    bounds.maxs[i] = std::max(bounds.maxs[i], *state.values[i]);
                }
            }
        }
    }
    // Dimensions that never appear defined collapse to [0, 0].
    for (std::size_t i = 0; i < corpus.feature_count; ++i) {
        if (bounds.mins[i] > bounds.maxs[i]) {
            bounds.mins[i] = 0.0;
            bounds.maxs[i] = 0.0;
        }
    }
    return bounds;
}

std::vector<PartialDataset> build_partial_datasets(const Corpus& corpus,
                                                   const std::vector<FeatureSubset>& subsets) {
    if (subsets.empty()) {
        throw DataError("no candidate feature subsets declared");
    }
    for (const auto& subset : subsets) {
        validate_subset(subset, corpus.feature_count);
    }

    std::vector<PartialDataset> datasets;
    datasets.reserve(subsets.size());
    for (const auto& subset : subsets) {
        PartialDataset dataset;
        dataset.subset_id = subset.id;
        dataset.dim = subset.dim();
        for (std::size_t d = 0; d < corpus.demos.size(); ++d) {
            const auto& demo = corpus.demos[d];
            for (std::size_t t = 0; t < demo.states.size(); ++t) {
                auto values = project_values(subset.indices, demo.states[t]);
                if (!values) {
                    continue;
                }
                dataset.points.insert(dataset.points.end(), values->begin(), values->end());
                dataset.provenance.emplace_back(static_cast<int>(d), static_cast<int>(t));
            }
        }
        datasets.push_back(std::move(dataset));
    }
    return datasets;
}

std::vector<int> dbscan(const std::vector<double>& points, std::size_t dim,
                        const DbscanParams& params) {
    if (dim == 0) {
        throw DataError("dbscan: zero-dimensional points");
    }
    if (!(params.eps > 0.0)) {
        throw DataError("dbscan: eps must be positive");
    }
    if (params.min_pts < 1) {
        throw DataError("dbscan: min_pts must be at least 1");
    }
    const std::size_t n = points.size() / dim;
    const double eps_sq = params.eps * params.eps;

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);

    auto neighbors_of = [&](std::size_t i, std::vector<std::size_t>& out) {
        out.clear();
        const double* pi = points.data() + i * dim;
        for (std::size_t j = 0; j < n; ++j) {
            if (sq_distance(pi, points.data() + j * dim, dim) <= eps_sq) {
                out.push_back(j);
            }
        }
    };

    std::vector<std::size_t> neigh;
    std::vector<std::size_t> queue;
    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) {
            continue;
        }
        neighbors_of(i, neigh);
        if (neigh.size() < static_cast<std::size_t>(params.min_pts)) {
            labels[i] = kNoise;
            continue;
        }
        const int cluster = next_cluster++;
        labels[i] = cluster;
        queue.clear();
        auto claim = [&](std::size_t k) {
            if (labels[k] == kNoise) {
                labels[k] = cluster; // border point, previously rejected as core
            } else if (labels[k] == kUnvisited) {
                labels[k] = cluster;
                queue.push_back(k); // core check happens when dequeued
            }
        };
        for (std::size_t k : neigh) {
            claim(k);
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            neighbors_of(queue[head], neigh);
            if (neigh.size() < static_cast<std::size_t>(params.min_pts)) {
                continue; // border point, does not expand
            }
            for (std::size_t k : neigh) {
                claim(k);
            }
        }
    }
    return labels;
}

std::vector<Cluster> build_clusters(const PartialDataset& dataset,
                                    const std::vector<int>& labels,
                                    const RadiusPolicy& policy,
                                    const std::vector<double>& dim_scales,
                                    double eps) {
    if (labels.size() != dataset.size()) {
        throw DataError("build_clusters: label count does not match dataset");
    }
    int cluster_count = 0;
    for (int label : labels) {
        cluster_count = std::max(cluster_count, label + 1);
    }

    std::vector<Cluster> clusters(cluster_count);
    for (std::size_t row = 0; row < labels.size(); ++row) {
        if (labels[row] < 0) {
            continue;
        }
        clusters[static_cast<std::size_t>(labels[row])].members.push_back(row);
    }

    double max_scale = 1.0;
    if (!dim_scales.empty()) {
        max_scale = *std::max_element(dim_scales.begin(), dim_scales.end());
    }

    for (auto& cluster : clusters) {
        cluster.subset_id = dataset.subset_id;
        cluster.center.assign(dataset.dim, 0.0);
        for (std::size_t row : cluster.members) {
            const double* p = dataset.row(row);
            for (std::size_t k = 0; k < dataset.dim; ++k) {
                cluster.center[k] += p[k];
            }
        }
        for (double& c : cluster.center) {
            c /= static_cast<double>(cluster.members.size());
        }
        if (policy.kind == RadiusPolicy::Kind::Fixed) {
            cluster.radius = policy.fixed_radius;
        } else {
            double max_dist_sq = 0.0;
            for (std::size_t row : cluster.members) {
                max_dist_sq = std::max(
                    max_dist_sq, sq_distance(dataset.row(row), cluster.center.data(), dataset.dim));
            }
            cluster.radius = std::max(std::sqrt(max_dist_sq), eps * max_scale);
        }
        if (!(cluster.radius > 0.0)) {
            throw DataError("cluster radius must be positive; check the radius policy");
        }
    }
    return clusters;
}

std::vector<Cluster> filter_initial(std::vector<Cluster> clusters, const Corpus& corpus,
                                    const std::vector<FeatureSubset>& subsets) {
    auto subset_by_id = [&](int id) -> const FeatureSubset& {
        for (const auto& subset : subsets) {
            if (subset.id == id) {
                return subset;
            }
        }
        throw DataError("cluster references unknown subset " + std::to_string(id));
    };

    std::erase_if(clusters, [&](const Cluster& cluster) {
        const FeatureSubset& subset = subset_by_id(cluster.subset_id);
        for (const auto& demo : corpus.demos) {
            if (demo.states.empty()) {
                continue;
            }
            auto proj = project_values(subset.indices, demo.states.front());
            if (!proj) {
                continue;
            }
            if (euclidean_distance(*proj, cluster.center) <= cluster.radius) {
                return true;
            }
        }
        return false;
    });
    return clusters;
}

std::vector<SubGoal> clusters_to_subgoals(const std::vector<Cluster>& clusters,
                                          const std::vector<FeatureSubset>& subsets) {
    std::vector<std::size_t> order(clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (clusters[a].subset_id != clusters[b].subset_id) {
            return clusters[a].subset_id < clusters[b].subset_id;
        }
        return clusters[a].center < clusters[b].center;
    });

    auto subset_by_id = [&](int id) -> const FeatureSubset& {
        for (const auto& subset : subsets) {
            if (subset.id == id) {
                return subset;
            }
        }
        throw DataError("cluster references unknown subset " + std::to_string(id));
    };

    std::vector<SubGoal> subgoals;
    subgoals.reserve(clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Cluster& cluster = clusters[order[i]];
        SubGoal goal;
        goal.symbol_id = static_cast<int>(i);
        goal.subset_id = cluster.subset_id;
        goal.indices = subset_by_id(cluster.subset_id).indices;
        goal.center = cluster.center;
        goal.radius = cluster.radius;
        validate_subgoal(goal);
        subgoals.push_back(std::move(goal));
    }
    return subgoals;
}

int resolve_min_pts(const DbscanParams& params, std::size_t demo_count) {
    if (params.min_pts >= 1) {
        return params.min_pts;
    }
    const auto half = static_cast<int>((demo_count + 1) / 2);
    return std::max(2, half);
}

SubgoalModel infer_subgoals(const Corpus& corpus, const std::vector<FeatureSubset>& subsets,
                            DbscanParams params, RadiusPolicy policy) {
    if (corpus.demos.empty()) {
        throw DataError("cannot infer sub-goals from an empty corpus");
    }
    params.min_pts = resolve_min_pts(params, corpus.demos.size());

    const NormalizationBounds bounds = compute_bounds(corpus);
    const std::vector<PartialDataset> datasets = build_partial_datasets(corpus, subsets);

    auto cluster_one = [&](const PartialDataset& dataset) {
        const FeatureSubset* subset = nullptr;
        for (const auto& s : subsets) {
            if (s.id == dataset.subset_id) {
                subset = &s;
            }
        }
        if (subset == nullptr) {
            throw DataError("dataset references unknown subset " +
                            std::to_string(dataset.subset_id));
        }
        std::vector<double> scales(dataset.dim);
        std::vector<double> normalized(dataset.points.size());
        for (std::size_t k = 0; k < dataset.dim; ++k) {
            const auto feature = static_cast<std::size_t>(subset->indices[k]);
            scales[k] = bounds.scale(feature);
            for (std::size_t row = 0; row < dataset.size(); ++row) {
                normalized[row * dataset.dim + k] =
                    bounds.normalize(feature, dataset.points[row * dataset.dim + k]);
            }
        }
        const std::vector<int> labels = dbscan(normalized, dataset.dim, params);
        return build_clusters(dataset, labels, policy, scales, params.eps);
    };

    std::vector<std::vector<Cluster>> per_subset(datasets.size());
    if (datasets.size() > 1) {
        std::vector<std::future<std::vector<Cluster>>> futures;
        futures.reserve(datasets.size());
        for (const auto& dataset : datasets) {
            futures.push_back(
                std::async(std::launch::async, [&cluster_one, &dataset] { return cluster_one(dataset); }));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) {
            per_subset[i] = futures[i].get();
        }
    } else {
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            per_subset[i] = cluster_one(datasets[i]);
        }
    }

    std::vector<Cluster> all;
    for (auto& clusters : per_subset) {
        all.insert(all.end(), std::make_move_iterator(clusters.begin()),
                   std::make_move_iterator(clusters.end()));
    }
    all = filter_initial(std::move(all), corpus, subsets);
    // Pre-sort so member counts line up with the symbol assignment below.
    std::sort(all.begin(), all.end(), [](const Cluster& a, const Cluster& b) {
        if (a.subset_id != b.subset_id) {
            return a.subset_id < b.subset_id;
        }
        return a.center < b.center;
    });

    SubgoalModel model;
    model.subgoals = clusters_to_subgoals(all, subsets);
    model.bounds = bounds;
    model.params = params;
    model.policy = policy;
    for (const Cluster& cluster : all) {
        model.member_counts.push_back(cluster.members.size());
    }
    return model;
}

void write_subgoal_set(std::ostream& out, const SubgoalModel& model) {
    out << "subgoal-set 1\n";
    out << "eps " << format_double(model.params.eps) << "\n";
    out << "min_pts " << model.params.min_pts << "\n";
    if (model.policy.kind == RadiusPolicy::Kind::Fixed) {
        out << "radius-policy fixed " << format_double(model.policy.fixed_radius) << "\n";
    } else {
        out << "radius-policy max-member\n";
    }
    out << "bounds " << model.bounds.size() << "\n";
    for (std::size_t i = 0; i < model.bounds.size(); ++i) {
        out << "bound " << i << ' ' << format_double(model.bounds.mins[i]) << ' '
            << format_double(model.bounds.maxs[i]) << "\n";
    }
    out << "subgoals " << model.subgoals.size() << "\n";
    for (std::size_t i = 0; i < model.subgoals.size(); ++i) {
        const SubGoal& g = model.subgoals[i];
        out << "subgoal " << g.symbol_id << " subset " << g.subset_id << " indices";
        for (int idx : g.indices) {
            out << ' ' << idx;
        }
        out << " members " << (i < model.member_counts.size() ? model.member_counts[i] : 0)
            << " radius " << format_double(g.radius) << " center";
        for (double c : g.center) {
            out << ' ' << format_double(c);
        }
        out << "\n";
    }
}

void write_subgoal_set(const std::filesystem::path& path, const SubgoalModel& model) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write sub-goal file " + path.string());
    }
    write_subgoal_set(out, model);
}

namespace {

[[noreturn]] void bad_subgoal_file(const std::string& origin, const std::string& what) {
    throw DataError(origin + ": invalid sub-goal file: " + what);
}

} // namespace

SubgoalModel read_subgoal_set(std::istream& in, const std::string& origin) {
    SubgoalModel model;
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "subgoal-set" || version != 1) {
        bad_subgoal_file(origin, "missing subgoal-set header");
    }
    if (!(in >> word >> model.params.eps) || word != "eps") {
        bad_subgoal_file(origin, "missing eps");
    }
    if (!(in >> word >> model.params.min_pts) || word != "min_pts") {
        bad_subgoal_file(origin, "missing min_pts");
    }
    if (!(in >> word) || word != "radius-policy") {
        bad_subgoal_file(origin, "missing radius-policy");
    }
    in >> word;
    if (word == "fixed") {
        model.policy.kind = RadiusPolicy::Kind::Fixed;
        in >> model.policy.fixed_radius;
    } else if (word == "max-member") {
        model.policy.kind = RadiusPolicy::Kind::MaxMember;
    } else {
        bad_subgoal_file(origin, "unknown radius policy '" + word + "'");
    }
    std::size_t bound_count = 0;
    if (!(in >> word >> bound_count) || word != "bounds") {
        bad_subgoal_file(origin, "missing bounds");
    }
    model.bounds.mins.resize(bound_count);
    model.bounds.maxs.resize(bound_count);
    for (std::size_t i = 0; i < bound_count; ++i) {
        std::size_t idx = 0;
        if (!(in >> word >> idx >> model.bounds.mins[i] >> model.bounds.maxs[i]) ||
            word != "bound" || idx != i) {
            bad_subgoal_file(origin, "malformed bound line");
        }
    }
    std::size_t goal_count = 0;
    if (!(in >> word >> goal_count) || word != "subgoals") {
        bad_subgoal_file(origin, "missing subgoals count");
    }
    for (std::size_t i = 0; i < goal_count; ++i) {
        SubGoal g;
        if (!(in >> word >> g.symbol_id) || word != "subgoal") {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        if (!(in >> word >> g.subset_id) || word != "subset") {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        if (!(in >> word) || word != "indices") {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        while (in >> word && word != "members") {
            g.indices.push_back(std::stoi(word));
        }
        std::size_t members = 0;
        if (!(in >> members)) {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        if (!(in >> word >> g.radius) || word != "radius") {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        if (!(in >> word) || word != "center") {
            bad_subgoal_file(origin, "malformed subgoal line");
        }
        g.center.resize(g.indices.size());
        for (double& c : g.center) {
            if (!(in >> c)) {
                bad_subgoal_file(origin, "malformed subgoal center");
            }
        }
        validate_subgoal(g);
        model.member_counts.push_back(members);
        model.subgoals.push_back(std::move(g));
    }
    return model;
}

SubgoalModel read_subgoal_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open sub-goal file " + path.string());
    }
    return read_subgoal_set(in, path.string());
}

} // namespace taskspec

#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "taskspec/errors.hpp"
#include "taskspec/subgoals.hpp"

using namespace taskspec;

namespace {

WorldState state_of(std::vector<Feature> values) {
    return WorldState{std::move(values)};
}

Corpus grid_corpus(int demos, int steps) {
    // Demo d, step t has features (d + t, 10*d + t, t).
    Corpus corpus;
    corpus.feature_count = 3;
    corpus.feature_names = {"f0", "f1", "f2"};
    for (int d = 0; d < demos; ++d) {
        Demonstration demo;
        for (int t = 0; t < steps; ++t) {
            demo.states.push_back(state_of({double(d + t), double(10 * d + t), double(t)}));
        }
        corpus.demos.push_back(std::move(demo));
    }
    return corpus;
}

std::vector<double> ball_points(std::mt19937_64& rng, double cx, double cy, double radius,
                                int count) {
    std::vector<double> points;
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    while (count > 0) {
        const double x = uniform(-radius, radius);
        const double y = uniform(-radius, radius);
        if (x * x + y * y <= radius * radius) {
            points.push_back(cx + x);
            points.push_back(cy + y);
            --count;
        }
    }
    return points;
}

} // namespace

TEST_CASE("build_partial_datasets keeps one dataset per subset with full cardinality") {
    const Corpus corpus = grid_corpus(2, 10);
    const std::vector<FeatureSubset> subsets = {{0, {0}}, {1, {1, 2}}, {2, {0, 1, 2}}};
    const auto datasets = build_partial_datasets(corpus, subsets);
    REQUIRE(datasets.size() == 3);
    for (const auto& dataset : datasets) {
        CHECK(dataset.size() == 20);
    }
    CHECK(datasets[1].dim == 2);
    // Provenance points back at (demo, time).
    CHECK(datasets[0].provenance[13] == std::pair<int, int>{1, 3});
}

TEST_CASE("build_partial_datasets omits rows with undefined projections") {
    Corpus corpus = grid_corpus(2, 10);
    corpus.demos[0].states[4].values[2] = std::nullopt;
    const std::vector<FeatureSubset> subsets = {{0, {2}}};
    const auto datasets = build_partial_datasets(corpus, subsets);
    CHECK(datasets[0].size() == 19);
}

TEST_CASE("the full-feature subset reproduces the raw states") {
    const Corpus corpus = grid_corpus(1, 5);
    const std::vector<FeatureSubset> subsets = {{0, {0, 1, 2}}};
    const auto datasets = build_partial_datasets(corpus, subsets);
    REQUIRE(datasets[0].size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
        const double* row = datasets[0].row(t);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(row[k] == *corpus.demos[0].states[t].values[k]);
        }
    }
}

TEST_CASE("dbscan handles the empty and singleton cases") {
    DbscanParams params;
    params.eps = 1.0;
    params.min_pts = 2;
    CHECK(dbscan({}, 2, params).empty());
    CHECK(dbscan({0.0, 0.0}, 2, params) == std::vector<int>{kNoise});
}

TEST_CASE("dbscan separates two tight balls with no noise") {
    std::mt19937_64 rng(42);
    std::vector<double> points = ball_points(rng, 0.0, 0.0, 0.05, 20);
    const auto more = ball_points(rng, 10.0, 10.0, 0.05, 20);
    points.insert(points.end(), more.begin(), more.end());

    DbscanParams params;
    params.eps = 1.0;
    params.min_pts = 3;
    const auto labels = dbscan(points, 2, params);

    const auto oracle = testutil::dbscan_oracle(points, 2, params.eps, params.min_pts);
    CHECK(labels == oracle);

    const auto partition = testutil::to_partition(labels);
    CHECK(partition.clusters.size() == 2);
    CHECK(partition.noise.empty());
}

TEST_CASE("dbscan matches the eps-graph oracle on random instances") {
    std::mt19937_64 rng(777);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng() % 3;
        const int n = 10 + static_cast<int>(rng() % 120);
        std::vector<double> points;
        points.reserve(static_cast<std::size_t>(n) * dim);
        for (int i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                points.push_back(uniform(0.0, 4.0));
            }
        }
        DbscanParams params;
        params.eps = uniform(0.1, 0.8);
        params.min_pts = 2 + static_cast<int>(rng() % 6);
        CHECK(dbscan(points, dim, params) ==
              testutil::dbscan_oracle(points, dim, params.eps, params.min_pts));
    }
}

TEST_CASE("dbscan partitions are invariant under input permutation") {
    std::mt19937_64 rng(2025);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    int tested = 0;
    while (tested < 10) {
        const int n = 20 + static_cast<int>(rng() % 80);
        std::vector<double> points;
        for (int i = 0; i < n; ++i) {
            points.push_back(uniform(0.0, 3.0));
            points.push_back(uniform(0.0, 3.0));
        }
        DbscanParams params;
        params.eps = uniform(0.1, 0.5);
        params.min_pts = 2 + static_cast<int>(rng() % 4);
        // Border points touching two clusters are claimed in input order by
        // definition; skip those instances, the partition is ambiguous there.
        if (testutil::has_ambiguous_border(points, 2, params.eps, params.min_pts)) {
            continue;
        }
        ++tested;

        const auto base = testutil::to_partition(dbscan(points, 2, params));

        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < perm.size(); ++i) {
            perm[i] = i;
        }
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> shuffled;
        shuffled.reserve(points.size());
        for (std::size_t i : perm) {
            shuffled.push_back(points[2 * i]);
            shuffled.push_back(points[2 * i + 1]);
        }
        const auto labels = dbscan(shuffled, 2, params);
        // Map the shuffled labels back to original indices before comparing.
        std::vector<int> unshuffled(static_cast<std::size_t>(n), kNoise);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            unshuffled[perm[i]] = labels[i];
        }
        CHECK(testutil::to_partition(unshuffled) == base);
    }
}

TEST_CASE("dbscan validates its parameters") {
    CHECK_THROWS_AS(dbscan({0.0}, 1, DbscanParams{0.0, 2}), DataError);
    CHECK_THROWS_AS(dbscan({0.0}, 1, DbscanParams{1.0, 0}), DataError);
    CHECK_THROWS_AS(dbscan({0.0}, 0, DbscanParams{1.0, 1}), DataError);
}

TEST_CASE("max-member clusters take the mean center and the farthest member radius") {
    PartialDataset dataset;
    dataset.subset_id = 0;
    dataset.dim = 2;
    dataset.points = {0.0, 0.0, 0.0, 2.0};
    dataset.provenance = {{0, 0}, {0, 1}};
    const std::vector<int> labels = {0, 0};

    const auto clusters = build_clusters(dataset, labels, RadiusPolicy::max_member(),
                                         {1.0, 1.0}, 0.1);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].center == std::vector<double>{0.0, 1.0});
    CHECK(clusters[0].radius == doctest::Approx(1.0));

    // The eps floor kicks in for degenerate spreads.
    PartialDataset tight = dataset;
    tight.points = {0.0, 0.0, 0.0, 0.0};
    const auto floored = build_clusters(tight, labels, RadiusPolicy::max_member(),
                                        {2.0, 1.0}, 0.1);
    CHECK(floored[0].radius == doctest::Approx(0.2)); // eps * max scale
}

TEST_CASE("fixed radius policy passes the radius through") {
    PartialDataset dataset;
    dataset.subset_id = 0;
    dataset.dim = 1;
    dataset.points = {1.0, 1.5, 7.0};
    dataset.provenance = {{0, 0}, {0, 1}, {0, 2}};
    const std::vector<int> labels = {0, 0, kNoise};
    const auto clusters =
        build_clusters(dataset, labels, RadiusPolicy::fixed(0.03), {1.0}, 0.05);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].radius == 0.03);
    CHECK(clusters[0].members.size() == 2);
}

TEST_CASE("filter_initial removes clusters containing any first state") {
    Corpus corpus;
    corpus.feature_count = 2;
    corpus.feature_names = {"f0", "f1"};
    {
        Demonstration demo;
        demo.states.push_back(state_of({0.0, 0.0}));
        demo.states.push_back(state_of({5.0, 5.0}));
        corpus.demos.push_back(demo);
    }
    const std::vector<FeatureSubset> subsets = {{0, {0, 1}}};

    auto make_cluster = [](std::vector<double> center, double radius) {
        Cluster cluster;
        cluster.subset_id = 0;
        cluster.members = {0};
        cluster.center = std::move(center);
        cluster.radius = radius;
        return cluster;
    };

    SUBCASE("cluster centered on the start point is removed") {
        const auto kept =
            filter_initial({make_cluster({0.0, 0.0}, 0.5)}, corpus, subsets);
        CHECK(kept.empty());
    }
    SUBCASE("cluster disjoint from all first states is kept") {
        const auto kept =
            filter_initial({make_cluster({5.0, 5.0}, 0.5)}, corpus, subsets);
        CHECK(kept.size() == 1);
    }
    SUBCASE("a first state exactly on the boundary still removes the cluster") {
        const auto kept =
            filter_initial({make_cluster({3.0, 4.0}, 5.0)}, corpus, subsets);
        CHECK(kept.empty());
    }
    SUBCASE("undefined first-state projections cannot intersect") {
        Corpus undef_corpus = corpus;
        undef_corpus.demos[0].states[0].values[0] = std::nullopt;
        const auto kept =
            filter_initial({make_cluster({0.0, 0.0}, 0.5)}, undef_corpus, subsets);
        CHECK(kept.size() == 1);
    }
}

TEST_CASE("clusters_to_subgoals assigns one symbol per cluster deterministically") {
    const std::vector<FeatureSubset> subsets = {{0, {0}}, {1, {1}}};
    std::vector<Cluster> clusters;
    for (int i = 0; i < 4; ++i) {
        Cluster cluster;
        cluster.subset_id = i % 2;
        cluster.members = {0};
        cluster.center = {double(10 - i)};
        cluster.radius = 0.5;
        clusters.push_back(cluster);
    }
    const auto subgoals = clusters_to_subgoals(clusters, subsets);
    REQUIRE(subgoals.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(subgoals[static_cast<std::size_t>(i)].symbol_id == i);
    }
    // (subset, center) ordering: subset 0 first, centers ascending inside.
    CHECK(subgoals[0].subset_id == 0);
    CHECK(subgoals[0].center[0] == 8.0);
    CHECK(subgoals[1].center[0] == 10.0);
    CHECK(subgoals[2].subset_id == 1);
    CHECK(subgoals[2].center[0] == 7.0);
    CHECK(subgoals[3].center[0] == 9.0);
    CHECK(subgoals[0].indices == std::vector<int>{0});
    CHECK(subgoals[2].indices == std::vector<int>{1});
}

TEST_CASE("min_pts defaults to half the demonstration count") {
    CHECK(resolve_min_pts(DbscanParams{0.05, 0}, 24) == 12);
    CHECK(resolve_min_pts(DbscanParams{0.05, 0}, 3) == 2);
    CHECK(resolve_min_pts(DbscanParams{0.05, 0}, 1) == 2);
    CHECK(resolve_min_pts(DbscanParams{0.05, 0}, 9) == 5);
    CHECK(resolve_min_pts(DbscanParams{0.05, 7}, 100) == 7);
}

TEST_CASE("inference pipeline invariants hold on a synthetic corpus") {
    // Two demos per ordering of two sub-goals in separate subspaces; feature 0
    // carries object A, feature 1 carries object B.
    Corpus corpus;
    corpus.feature_count = 2;
    corpus.feature_names = {"a", "b"};
    auto make_demo = [&](bool a_first, double nudge) {
        Demonstration demo;
        auto push = [&](double a, double b) { demo.states.push_back(state_of({a, b})); };
        push(0.0 + nudge, 10.0 + nudge);
        if (a_first) {
            push(2.0, 10.0 + nudge);
            push(2.0 + nudge / 10, 10.0);
            push(2.0, 12.0);
            push(2.0, 12.0 + nudge / 10);
        } else {
            push(0.0 + nudge, 12.0);
            push(0.0, 12.0 + nudge / 10);
            push(2.0, 12.0);
            push(2.0 + nudge / 10, 12.0);
        }
        corpus.demos.push_back(std::move(demo));
    };
    for (int i = 0; i < 4; ++i) {
        make_demo(true, 0.01 * i);
        make_demo(false, 0.01 * i);
    }
    const std::vector<FeatureSubset> subsets = {{0, {0}}, {1, {1}}};

    DbscanParams params;
    params.eps = 0.05;
    const SubgoalModel model =
        infer_subgoals(corpus, subsets, params, RadiusPolicy::max_member());

    REQUIRE(model.subgoals.size() == 2);
    CHECK(model.member_counts.size() == 2);
    CHECK(model.params.min_pts == 4);

    // No discovered sub-goal may be satisfied by any demonstration's first state.
    for (const auto& goal : model.subgoals) {
        for (const auto& demo : corpus.demos) {
            CHECK_FALSE(satisfies(goal, demo.states.front()));
        }
    }

    // Normalization bounds cover the corpus extremes.
    CHECK(model.bounds.mins[0] == doctest::Approx(0.0));
    CHECK(model.bounds.maxs[1] == doctest::Approx(12.001).epsilon(0.01));
}

TEST_CASE("every member lies inside its cluster ball under max-member radius") {
    std::mt19937_64 rng(99);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    PartialDataset dataset;
    dataset.subset_id = 0;
    dataset.dim = 2;
    for (int i = 0; i < 120; ++i) {
        dataset.points.push_back(uniform(0, 2));
        dataset.points.push_back(uniform(0, 2));
        dataset.provenance.emplace_back(0, i);
    }
    DbscanParams params;
    params.eps = 0.25;
    params.min_pts = 3;
    const auto labels = dbscan(dataset.points, 2, params);
    const auto clusters =
        build_clusters(dataset, labels, RadiusPolicy::max_member(), {1.0, 1.0}, params.eps);
    for (const auto& cluster : clusters) {
        for (std::size_t row : cluster.members) {
            const double dx = dataset.row(row)[0] - cluster.center[0];
            const double dy = dataset.row(row)[1] - cluster.center[1];
            CHECK(std::sqrt(dx * dx + dy * dy) <= cluster.radius + 1e-12);
        }
    }
}

TEST_CASE("subgoal model round-trips through the text export") {
    Corpus corpus = grid_corpus(4, 6);
    const std::vector<FeatureSubset> subsets = {{0, {0, 1}}, {1, {2}}};
    DbscanParams params;
    params.eps = 0.4;
    params.min_pts = 2;
    const SubgoalModel model = infer_subgoals(corpus, subsets, params, RadiusPolicy::fixed(0.07));

    std::ostringstream out;
    write_subgoal_set(out, model);
    std::istringstream in(out.str());
    const SubgoalModel again = read_subgoal_set(in, "subgoals.txt");

    CHECK(again.params.eps == model.params.eps);
    CHECK(again.params.min_pts == model.params.min_pts);
    CHECK(again.member_counts == model.member_counts);
    REQUIRE(again.subgoals.size() == model.subgoals.size());
    for (std::size_t i = 0; i < model.subgoals.size(); ++i) {
        CHECK(again.subgoals[i].symbol_id == model.subgoals[i].symbol_id);
        CHECK(again.subgoals[i].subset_id == model.subgoals[i].subset_id);
        CHECK(again.subgoals[i].indices == model.subgoals[i].indices);
        CHECK(again.subgoals[i].center == model.subgoals[i].center);
        CHECK(again.subgoals[i].radius == model.subgoals[i].radius);
    }
    CHECK(again.bounds.mins == model.bounds.mins);
    CHECK(again.bounds.maxs == model.bounds.maxs);
}

#pragma once

// Shared test utilities: independent oracles (kept free of the implementation
// paths they check), random generators, and canonical forms for comparing
// automata and clusterings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "taskspec/automaton.hpp"
#include "taskspec/rational.hpp"
#include "taskspec/simulator.hpp"
#include "taskspec/wordgen.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// DBSCAN oracle: exhaustive pairwise distances, connected components of core
// points, borders attached to the adjacent component with the smallest core
// index, noise otherwise. Component numbering follows smallest core index, so
// labels are directly comparable with the library's deterministic output.
inline std::vector<int> dbscan_oracle(const std::vector<double>& points, std::size_t dim,
                                      double eps, int min_pts) {
    const std::size_t n = dim == 0 ? 0 : points.size() / dim;
    const double eps_sq = eps * eps;
    auto close = [&](std::size_t a, std::size_t b) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = points[a * dim + k] - points[b * dim + k];
            sq += d * d;
        }
        return sq <= eps_sq;
    };

    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (close(i, j)) {
                neighbors[i].push_back(j);
            }
        }
    }
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);
    }

    std::vector<int> labels(n, -1);
    std::vector<int> component(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || component[i] >= 0) {
            continue;
        }
        const int comp = next++;
        std::vector<std::size_t> stack{i};
        component[i] = comp;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v : neighbors[u]) {
                if (core[v] && component[v] < 0) {
                    component[v] = comp;
                    stack.push_back(v);
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            labels[i] = component[i];
        } else {
            int best = -1;
            for (std::size_t v : neighbors[i]) {
                if (core[v] && (best < 0 || component[v] < best)) {
                    best = component[v];
                }
            }
            labels[i] = best; // -1 stays noise
        }
    }
    return labels;
}

// True when some non-core point touches cores of two different components;
// such instances have order-dependent border assignment.
inline bool has_ambiguous_border(const std::vector<double>& points, std::size_t dim, double eps,
                                 int min_pts) {
    const std::size_t n = dim == 0 ? 0 : points.size() / dim;
    const auto labels = dbscan_oracle(points, dim, eps, min_pts);
    const double eps_sq = eps * eps;
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = points[i * dim + k] - points[j * dim + k];
                sq += d * d;
            }
            if (sq <= eps_sq) {
                ++count;
            }
        }
        core[i] = count >= static_cast<std::size_t>(min_pts);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            continue;
        }
        std::set<int> touched;
        for (std::size_t j = 0; j < n; ++j) {
            if (!core[j]) {
                continue;
            }
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = points[i * dim + k] - points[j * dim + k];
                sq += d * d;
            }
            if (sq <= eps_sq) {
                touched.insert(labels[j]);
            }
        }
        if (touched.size() > 1) {
            return true;
        }
    }
    return false;
}

// Clusterings as a canonical partition: the set of clusters (each a sorted
// point set) plus the noise set. Invariant under cluster relabeling.
struct Partition {
    std::set<std::vector<std::size_t>> clusters;
    std::set<std::size_t> noise;

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.clusters == b.clusters && a.noise == b.noise;
    }
};

inline Partition to_partition(const std::vector<int>& labels) {
    Partition partition;
    std::map<int, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            partition.noise.insert(i);
        } else {
            buckets[labels[i]].push_back(i);
        }
    }
    for (auto& [label, members] : buckets) {
        partition.clusters.insert(members);
    }
    return partition;
}

// ---------------------------------------------------------------------------
// Observed-transition walker: accepts a word iff every step follows a
// (completed-set, symbol) pair seen in the training words and the final
// completed set terminated some training word. Built straight from the word
// list, independent of the automaton code.
struct SubsetWalker {
    std::set<std::pair<std::uint64_t, int>> observed;
    std::set<std::uint64_t> terminal;

    static SubsetWalker build(const std::vector<taskspec::Word>& words) {
        SubsetWalker walker;
        for (const auto& word : words) {
            std::uint64_t mask = 0;
            for (int symbol : word) {
                walker.observed.insert({mask, symbol});
                mask |= std::uint64_t{1} << symbol;
            }
            walker.terminal.insert(mask);
        }
        return walker;
    }

    bool accepts(const taskspec::Word& word) const {
        std::uint64_t mask = 0;
        for (int symbol : word) {
            if (symbol < 0 || symbol >= 64 || !observed.count({mask, symbol})) {
                return false;
            }
            mask |= std::uint64_t{1} << symbol;
        }
        return terminal.count(mask) != 0;
    }
};

// All words over {0..symbol_count-1} of length <= max_len (repeats included).
inline std::vector<taskspec::Word> all_words_up_to(int symbol_count, int max_len) {
    std::vector<taskspec::Word> words{taskspec::Word{}};
    std::vector<taskspec::Word> frontier{taskspec::Word{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<taskspec::Word> next;
        for (const auto& word : frontier) {
            for (int s = 0; s < symbol_count; ++s) {
                taskspec::Word extended = word;
                extended.push_back(s);
                words.push_back(extended);
                next.push_back(std::move(extended));
            }
        }
        frontier = std::move(next);
    }
    return words;
}

// ---------------------------------------------------------------------------
// Random corpora of non-empty words with distinct symbols.
inline std::vector<taskspec::Word> random_corpus(std::mt19937_64& rng, int symbol_count,
                                                 int max_words) {
    const int count = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_words));
    std::vector<taskspec::Word> words;
    std::vector<int> symbols(static_cast<std::size_t>(symbol_count));
    for (int s = 0; s < symbol_count; ++s) {
        symbols[static_cast<std::size_t>(s)] = s;
    }
    for (int w = 0; w < count; ++w) {
        const int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(symbol_count));
        for (int i = symbol_count - 1; i > 0; --i) {
            const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(symbols[static_cast<std::size_t>(i)], symbols[static_cast<std::size_t>(j)]);
        }
        words.emplace_back(symbols.begin(), symbols.begin() + len);
    }
    return words;
}

// ---------------------------------------------------------------------------
// Canonical automaton form keyed by completed-set masks; equal forms mean the
// automata are isomorphic with identical counts and probabilities.
struct CanonicalForm {
    std::set<std::uint64_t> masks;
    std::set<std::uint64_t> accepting;
    std::map<std::uint64_t, std::pair<std::int64_t, std::int64_t>> accept_prob;
    std::map<std::tuple<std::uint64_t, int, std::uint64_t>, std::int64_t> transition_counts;
    std::map<std::tuple<std::uint64_t, int, std::uint64_t>, std::pair<std::int64_t, std::int64_t>>
        transition_probs;

    friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) {
        return a.masks == b.masks && a.accepting == b.accepting &&
               a.accept_prob == b.accept_prob && a.transition_counts == b.transition_counts &&
               a.transition_probs == b.transition_probs;
    }
};

inline CanonicalForm canonical_form(const taskspec::Pdfa& pdfa) {
    CanonicalForm form;
    const auto& dfa = pdfa.dfa;
    for (taskspec::StateId q = 0; q < dfa.state_count(); ++q) {
        const std::uint64_t mask = dfa.state_masks[static_cast<std::size_t>(q)];
        form.masks.insert(mask);
        if (dfa.accepting[static_cast<std::size_t>(q)]) {
            form.accepting.insert(mask);
        }
        const auto& fp = pdfa.accept_prob[static_cast<std::size_t>(q)];
        form.accept_prob[mask] = {fp.num(), fp.den()};
        const auto& row = dfa.edges[static_cast<std::size_t>(q)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            const std::uint64_t dst_mask =
                dfa.state_masks[static_cast<std::size_t>(row[k].second)];
            const auto key = std::make_tuple(mask, row[k].first, dst_mask);
            form.transition_counts[key] = pdfa.freq.at(q, row[k].second);
            const auto& tp = pdfa.edge_prob[static_cast<std::size_t>(q)][k];
            form.transition_probs[key] = {tp.num(), tp.den()};
        }
    }
    return form;
}

// Least-squares linear fit quality.
inline double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = slope * x[i] + intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    return ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

// ---------------------------------------------------------------------------
// Script fixtures shared by unit, CLI and acceptance tests.

// `object_count` blocks in a row, block i placed at its own spot; optional
// ordering constraints between the placement sub-goals.
inline taskspec::TaskScript placement_fixture(int object_count,
                                              std::vector<std::pair<int, int>> constraints) {
    taskspec::TaskScript script;
    for (int i = 0; i < object_count; ++i) {
        taskspec::SimObject object;
        object.name = "block" + std::to_string(i);
        object.initial = {static_cast<double>(i), 0.0, 0.0};
        script.objects.push_back(std::move(object));
    }
    for (int i = 0; i < object_count; ++i) {
        taskspec::ScriptSubgoal sg;
        sg.object = i;
        sg.target = {static_cast<double>(i), 2.0, 0.5};
        sg.radius = 0.06;
        script.subgoals.push_back(sg);
    }
    script.constraints = std::move(constraints);
    script.motion.step_length = 0.5;
    script.motion.dwell_steps = 3;
    script.motion.start_spread = 0.3;
    return script;
}

// Two stacks of two blocks with a strong preference for finishing the second
// stack first: ordering weights count demonstrations per ordering
// (lexicographic extension order: 0123, 0213, 0231, 2013, 2031, 2301).
inline taskspec::TaskScript two_stack_fixture() {
    taskspec::TaskScript script = placement_fixture(4, {{0, 1}, {2, 3}});
    script.default_weight = 1.0;
    script.weight_overrides.push_back({{2, 0, 3, 1}, 4.0});
    script.weight_overrides.push_back({{2, 3, 0, 1}, 12.0});
    return script;
}

inline std::vector<int> two_stack_counts() {
    // Aligned with lexicographic extension order.
    return {1, 1, 1, 1, 4, 12};
}

} // namespace testutil

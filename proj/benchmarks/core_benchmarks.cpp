// Microbenchmarks for the two hot paths: density clustering and automaton
// inference. The scaling tables live in the CLI (`taskspec bench`); these are
// for spotting regressions in the inner loops.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "taskspec/automaton.hpp"
#include "taskspec/simulator.hpp"
#include "taskspec/subgoals.hpp"
#include "taskspec/wordgen.hpp"

namespace {

using namespace taskspec;

std::vector<double> blob_points(std::size_t count, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> points;
    points.reserve(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        const double cx = (i % 4) * 10.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double jitter = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
            points.push_back(cx + jitter);
        }
    }
    return points;
}

void BM_Dbscan(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto points = blob_points(n, 3, 7);
    DbscanParams params;
    params.eps = 0.3;
    params.min_pts = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbscan(points, 3, params));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dbscan)->Range(256, 4096)->Complexity();

TaskScript four_block_script() {
    TaskScript script;
    for (int i = 0; i < 4; ++i) {
        SimObject object;
        object.name = "block" + std::to_string(i);
        object.initial = {static_cast<double>(i), 0.0, 0.0};
        script.objects.push_back(std::move(object));
        ScriptSubgoal sg;
        sg.object = i;
        sg.target = {static_cast<double>(i), 2.0, 0.5};
        sg.radius = 0.06;
        script.subgoals.push_back(sg);
    }
    script.motion.step_length = 0.5;
    return script;
}

void BM_InferDfa(benchmark::State& state) {
    const auto script = four_block_script();
    const Corpus corpus = generate_demos(script, static_cast<int>(state.range(0)), 11);
    const auto words = corpus_to_words(corpus, script.true_subgoals());
    for (auto _ : state) {
        auto result = infer_dfa(4, words);
        benchmark::DoNotOptimize(pdfa_from_counts(result.dfa, result.freq));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InferDfa)->Range(64, 1024)->Complexity();

void BM_DemoToWord(benchmark::State& state) {
    const auto script = four_block_script();
    const Corpus corpus = generate_demos(script, 1, 13);
    const auto goals = script.true_subgoals();
    for (auto _ : state) {
        benchmark::DoNotOptimize(demo_to_word(corpus.demos.front(), goals));
    }
}
BENCHMARK(BM_DemoToWord);

} // namespace

BENCHMARK_MAIN();

// taskspec: learn probabilistic task automata from demonstrations and plan
// with them. Subcommands: gen, infer, plan, export, bench.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taskspec/automaton.hpp"
#include "taskspec/bench.hpp"
#include "taskspec/demo_io.hpp"
#include "taskspec/errors.hpp"
#include "taskspec/planner.hpp"
#include "taskspec/simulator.hpp"
#include "taskspec/subgoals.hpp"
#include "taskspec/wordgen.hpp"

namespace {

namespace fs = std::filesystem;
using namespace taskspec;

constexpr int kExitSuccess = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitStuck = 3;

constexpr std::size_t kLanguageCap = 1000000;

struct CommonOpts {
    std::string demos_path;
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
};

RadiusPolicy parse_radius_flag(const std::string& value) {
    if (value == "max-member") {
        return RadiusPolicy::max_member();
    }
    try {
        const double r = std::stod(value);
        if (!(r > 0.0)) {
            throw UsageError("--radius must be positive or 'max-member'");
        }
        return RadiusPolicy::fixed(r);
    } catch (const std::invalid_argument&) {
        throw UsageError("--radius expects a number or 'max-member', got '" + value + "'");
    }
}

std::vector<int> parse_levels(const std::string& csv) {
    std::vector<int> levels;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string token =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!token.empty()) {
            try {
                levels.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw UsageError("--levels expects comma-separated integers, got '" + token + "'");
            }
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (levels.empty()) {
        throw UsageError("--levels expects at least one integer");
    }
    return levels;
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) {
        throw UsageError("cannot create output directory " + path.string());
    }
    return path;
}

std::string language_summary(const Dfa& dfa) {
    const std::size_t size = language_size(dfa, kLanguageCap);
    if (size > kLanguageCap) {
        return ">" + std::to_string(kLanguageCap);
    }
    return std::to_string(size);
}

int cmd_gen(const std::string& script_path, const CommonOpts& opts, int count, bool exhaustive,
            int per_extension) {
    const TaskScript script = load_script(script_path);
    Corpus corpus;
    if (exhaustive) {
        const auto extensions = enumerate_extensions(script);
        std::vector<int> counts(extensions.size(), per_extension);
        corpus = generate_demos_by_counts(script, counts, opts.seed);
    } else {
        corpus = generate_demos(script, count, opts.seed);
    }

    const fs::path out = ensure_out_dir(opts.out_dir);
    write_demonstrations(out / "demos.txt", corpus);
    DatasetConfig config;
    config.feature_count = corpus.feature_count;
    config.feature_names = corpus.feature_names;
    config.candidate_subsets = script.feature_subsets();
    write_config(out / "config.json", config);

    std::cout << "demonstrations: " << corpus.demos.size() << "\n";
    std::cout << "states: " << corpus.state_count() << "\n";
    std::cout << "wrote: " << (out / "demos.txt").string() << ", "
              << (out / "config.json").string() << "\n";
    return kExitSuccess;
}

int cmd_infer(const CommonOpts& opts, std::optional<double> eps, std::optional<int> min_pts,
              const std::optional<std::string>& radius_flag) {
    if (opts.demos_path.empty() || opts.config_path.empty()) {
        throw UsageError("infer requires --demos and --config");
    }
    const DatasetConfig config = load_config(opts.config_path);
    const Corpus corpus = load_demonstrations(opts.demos_path, config);

    DbscanParams params;
    if (eps) {
        params.eps = *eps;
    }
    if (min_pts) {
        params.min_pts = *min_pts;
    }
    RadiusPolicy policy;
    if (radius_flag) {
        policy = parse_radius_flag(*radius_flag);
    }

    const SubgoalModel model = infer_subgoals(corpus, config.candidate_subsets, params, policy);
    const auto words = corpus_to_words(corpus, model.subgoals);
    const auto inferred = infer_dfa(static_cast<int>(model.subgoals.size()), words);
    const Pdfa pdfa = pdfa_from_counts(inferred.dfa, inferred.freq);

    const fs::path out = ensure_out_dir(opts.out_dir);
    write_subgoal_set(out / "subgoals.txt", model);
    {
        std::ofstream words_out(out / "words.txt");
        if (!words_out) {
            throw DataError("cannot write " + (out / "words.txt").string());
        }
        write_words(words_out, words);
    }
    write_pdfa(out / "pdfa.txt", PdfaModel{pdfa, model.subgoals});

    std::cout << "subgoals: " << model.subgoals.size() << "\n";
    std::cout << "states: " << pdfa.dfa.state_count() << "\n";
    std::cout << "accepting: " << pdfa.dfa.accepting_count() << "\n";
    std::cout << "language: " << language_summary(pdfa.dfa) << "\n";
    return kExitSuccess;
}

int cmd_plan(const std::string& pdfa_path, const CommonOpts& opts,
             const std::optional<std::string>& schedule_path, bool prefer_terminal) {
    if (pdfa_path.empty()) {
        throw UsageError("plan requires --pdfa");
    }
    const PdfaModel model = read_pdfa(fs::path(pdfa_path));
    PlannerOptions planner_opts;
    planner_opts.prefer_terminal_mass = prefer_terminal;

    if (!schedule_path) {
        const auto plan = greedy_plan(model.pdfa, model.pdfa.dfa.initial(), AvailabilityView{},
                                      planner_opts);
        if (!plan) {
            std::cerr << "stuck: no admissible plan from the initial state\n";
            return kExitStuck;
        }
        write_plan(std::cout, *plan);
        return kExitSuccess;
    }

    const AvailabilitySchedule schedule = load_schedule(*schedule_path);
    SimEnv env(schedule, model.subgoals);
    const ExecutionTrace trace = execute(model.pdfa, env, model.pdfa.dfa.initial(), planner_opts);

    const fs::path out = ensure_out_dir(opts.out_dir);
    {
        std::ofstream trace_out(out / "trace.txt");
        if (!trace_out) {
            throw DataError("cannot write " + (out / "trace.txt").string());
        }
        write_trace(trace_out, trace);
    }
    write_trace(std::cout, trace);
    if (!trace.finished()) {
        std::cerr << "stuck: execution could not reach an accepting state\n";
        return kExitStuck;
    }
    return kExitSuccess;
}

int cmd_export(const std::string& pdfa_path, const std::string& probabilities,
               const std::optional<std::string>& out_path) {
    if (pdfa_path.empty()) {
        throw UsageError("export requires --pdfa");
    }
    if (probabilities != "on" && probabilities != "off") {
        throw UsageError("--probabilities expects 'on' or 'off'");
    }
    const PdfaModel model = read_pdfa(fs::path(pdfa_path));
    DotOptions dot;
    dot.probabilities = probabilities == "on";
    const std::string text = export_dot(model.pdfa, dot);
    if (out_path) {
        std::ofstream out(*out_path);
        if (!out) {
            throw DataError("cannot write " + *out_path);
        }
        out << text;
    } else {
        std::cout << text;
    }
    return kExitSuccess;
}

int cmd_bench(const std::string& axis_name, const std::string& levels_csv, int reps,
              const CommonOpts& opts, const std::optional<std::string>& out_path) {
    const BenchAxis axis = parse_bench_axis(axis_name);
    const std::vector<int> levels = parse_levels(levels_csv);
    if (reps == 1) {
        std::cerr << "warning: a single repetition gives zero deviation estimates\n";
    }
    BenchOptions options;
    options.repetitions = reps;
    options.seed = opts.seed;
    const auto rows = scaling_bench(axis, levels, options);
    if (out_path) {
        std::ofstream out(*out_path);
        if (!out) {
            throw DataError("cannot write " + *out_path);
        }
        write_bench_table(out, rows);
    } else {
        write_bench_table(std::cout, rows);
    }
    return kExitSuccess;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn probabilistic task automata from demonstrations and plan with them"};
    app.require_subcommand(1);

    CommonOpts opts;

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a demonstration corpus from a task script");
    std::string script_path;
    int gen_count = 20;
    bool gen_exhaustive = false;
    int gen_per_extension = 1;
    gen->add_option("--script", script_path, "Task script file (JSON)")->required();
    gen->add_option("--count", gen_count, "Number of demonstrations to sample");
    gen->add_flag("--exhaustive", gen_exhaustive,
                  "One demonstration per valid ordering instead of sampling");
    gen->add_option("--per-extension", gen_per_extension,
                    "Demonstrations per ordering in --exhaustive mode");
    gen->add_option("--out-dir", opts.out_dir, "Output directory");
    gen->add_option("--seed", opts.seed, "Random seed");

    // infer
    auto* infer = app.add_subcommand("infer", "Infer sub-goals and the task automaton");
    std::optional<double> eps;
    std::optional<int> min_pts;
    std::optional<std::string> radius_flag;
    infer->add_option("--demos", opts.demos_path, "Demonstration file")->required();
    infer->add_option("--config", opts.config_path, "Dataset config (JSON)")->required();
    infer->add_option("--out-dir", opts.out_dir, "Output directory");
    infer->add_option("--seed", opts.seed, "Random seed (kept for reproducible pipelines)");
    infer->add_option("--eps", eps, "DBSCAN neighborhood radius in normalized units");
    infer->add_option("--min-pts", min_pts,
                      "DBSCAN core threshold; default max(2, half the demonstrations)");
    infer->add_option("--radius", radius_flag, "Sub-goal radius: a number or 'max-member'");

    // plan
    auto* plan = app.add_subcommand("plan", "Plan a sub-goal sequence from a learned automaton");
    std::string pdfa_path;
    std::optional<std::string> schedule_path;
    bool prefer_terminal = false;
    plan->add_option("--pdfa", pdfa_path, "PDFA file")->required();
    plan->add_option("--simulate,--schedule", schedule_path,
                     "Availability schedule file; runs the plan/act loop and writes the trace");
    plan->add_option("--out-dir", opts.out_dir, "Output directory for the trace");
    plan->add_flag("--prefer-terminal-fp", prefer_terminal,
                   "Keep going at accepting states while a transition beats stopping");

    // export
    auto* exp = app.add_subcommand("export", "Render a learned automaton as Graphviz DOT");
    std::string probabilities = "on";
    std::optional<std::string> export_out;
    exp->add_option("--pdfa", pdfa_path, "PDFA file")->required();
    exp->add_option("--probabilities", probabilities, "Label edges with probabilities: on|off");
    exp->add_option("--out", export_out, "Write DOT here instead of stdout");

    // bench
    auto* bench = app.add_subcommand("bench", "Time clustering and inference across task scales");
    std::string axis_name;
    std::string levels_csv;
    int reps = 3;
    std::optional<std::string> bench_out;
    bench->add_option("--axis", axis_name, "demos | subgoals | language | objects")->required();
    bench->add_option("--levels", levels_csv, "Comma-separated increasing levels")->required();
    bench->add_option("--reps", reps, "Repetitions per level");
    bench->add_option("--seed", opts.seed, "Random seed");
    bench->add_option("--out", bench_out, "Write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen(script_path, opts, gen_count, gen_exhaustive, gen_per_extension);
        }
        if (infer->parsed()) {
            return cmd_infer(opts, eps, min_pts, radius_flag);
        }
        if (plan->parsed()) {
            return cmd_plan(pdfa_path, opts, schedule_path, prefer_terminal);
        }
        if (exp->parsed()) {
            return cmd_export(pdfa_path, probabilities, export_out);
        }
        if (bench->parsed()) {
            return cmd_bench(axis_name, levels_csv, reps, opts, bench_out);
        }
        std::cerr << "error: no subcommand given\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

#include "taskspec/automaton.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "taskspec/errors.hpp"

namespace taskspec {
namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_prob4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string mask_label(std::uint64_t mask, int symbol_count) {
    std::string label = "{";
    bool first = true;
    for (int s = 0; s < symbol_count; ++s) {
        if (mask & (std::uint64_t{1} << s)) {
            if (!first) {
                label += ",";
            }
            label += "g" + std::to_string(s);
            first = false;
        }
    }
    label += "}";
    return label;
}

} // namespace

std::optional<StateId> Dfa::next(StateId state, SymbolId symbol) const {
    const auto& out = edges[static_cast<std::size_t>(state)];
    for (const auto& [sym, dst] : out) {
        if (sym == symbol) {
            return dst;
        }
        if (sym > symbol) {
            break;
        }
    }
    return std::nullopt;
}

std::vector<StateId> Dfa::accepting_states() const {
    std::vector<StateId> out;
    for (StateId q = 0; q < state_count(); ++q) {
        if (accepting[static_cast<std::size_t>(q)]) {
            out.push_back(q);
        }
    }
    return out;
}

int Dfa::accepting_count() const {
    return static_cast<int>(std::count(accepting.begin(), accepting.end(), char{1}));
}

std::int64_t FrequencyMap::at(StateId from, StateId to) const {
    const auto it = counts.find({from, to});
    return it == counts.end() ? 0 : it->second;
}

std::int64_t FrequencyMap::total() const {
    std::int64_t sum = 0;
    for (const auto& [key, count] : counts) {
        sum += count;
    }
    return sum;
}

InferenceResult infer_dfa(int symbol_count, const std::vector<Word>& words) {
    if (symbol_count < 0 || symbol_count > 64) {
        throw DataError("alphabet size must be between 0 and 64");
    }
    if (words.empty()) {
        throw DataError("cannot infer an automaton from an empty word corpus");
    }

    InferenceResult result;
    Dfa& dfa = result.dfa;
    dfa.symbol_count = symbol_count;
    const std::size_t state_hint =
        std::size_t{1} << std::min(symbol_count, 10); // reachable-state ceiling
    dfa.state_masks.reserve(state_hint);
    dfa.edges.reserve(state_hint);
    dfa.accepting.reserve(state_hint);
    dfa.mask_index.reserve(state_hint);
    dfa.state_masks.push_back(0);
    dfa.edges.emplace_back();
    dfa.accepting.push_back(0);
    dfa.mask_index.emplace(0, 0);

    // Counts ride on the edges during the scan; the sparse map is assembled
    // once afterwards. Keeps the per-symbol cost flat regardless of how many
    // distinct transitions the corpus exercises.
    std::vector<std::vector<std::int64_t>> edge_counts;
    edge_counts.reserve(state_hint);
    edge_counts.emplace_back();

    for (const Word& word : words) {
        std::uint64_t completed = 0;
        StateId state = 0;
        for (SymbolId symbol : word) {
            if (symbol < 0 || symbol >= symbol_count) {
                throw DataError("word symbol " + std::to_string(symbol) +
                                " is outside the alphabet of size " +
                                std::to_string(symbol_count));
            }
            const std::uint64_t bit = std::uint64_t{1} << symbol;
            if (completed & bit) {
                throw DataError("word repeats symbol " + std::to_string(symbol) +
                                "; completed-set semantics forbid repeats");
            }
            completed |= bit;

            StateId target;
            const auto it = dfa.mask_index.find(completed);
            if (it != dfa.mask_index.end()) {
                target = it->second;
            } else {
                target = dfa.state_count();
                dfa.state_masks.push_back(completed);
                dfa.edges.emplace_back();
                dfa.accepting.push_back(0);
                dfa.mask_index.emplace(completed, target);
                edge_counts.emplace_back();
            }

            auto& row = dfa.edges[static_cast<std::size_t>(state)];
            auto& counts = edge_counts[static_cast<std::size_t>(state)];
            const auto pos = std::lower_bound(
                row.begin(), row.end(), symbol,
                [](const std::pair<SymbolId, StateId>& e, SymbolId s) { return e.first < s; });
            if (pos != row.end() && pos->first == symbol) {
                ++counts[static_cast<std::size_t>(pos - row.begin())];
            } else {
                counts.insert(counts.begin() + (pos - row.begin()), 1);
                row.insert(pos, {symbol, target});
            }
            state = target;
        }
        dfa.accepting[static_cast<std::size_t>(state)] = 1;
    }

    for (StateId q = 0; q < dfa.state_count(); ++q) {
        const auto& row = dfa.edges[static_cast<std::size_t>(q)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            result.freq.counts[{q, row[k].second}] =
                edge_counts[static_cast<std::size_t>(q)][k];
        }
    }
    return result;
}

Rational Pdfa::edge_probability(StateId state, SymbolId symbol) const {
    const auto& out = dfa.edges[static_cast<std::size_t>(state)];
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k].first == symbol) {
            return edge_prob[static_cast<std::size_t>(state)][k];
        }
    }
    return Rational::zero();
}

Pdfa pdfa_from_counts(const Dfa& dfa, const FrequencyMap& freq) {
    const auto n = static_cast<std::size_t>(dfa.state_count());
    std::vector<std::int64_t> out_total(n, 0);
    std::vector<std::int64_t> in_total(n, 0);
    for (const auto& [key, count] : freq.counts) {
        const auto [from, to] = key;
        if (from < 0 || to < 0 || from >= dfa.state_count() || to >= dfa.state_count()) {
            throw DataError("frequency map references unknown states");
        }
        if (count <= 0) {
            throw DataError("frequency map has a non-positive count");
        }
        bool matched = false;
        for (const auto& [sym, dst] : dfa.edges[static_cast<std::size_t>(from)]) {
            if (dst == to) {
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw DataError("frequency map counts a transition the DFA does not define");
        }
        out_total[static_cast<std::size_t>(from)] += count;
        in_total[static_cast<std::size_t>(to)] += count;
    }

    Pdfa pdfa;
    pdfa.dfa = dfa;
    pdfa.freq = freq;
    pdfa.edge_prob.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        for (const auto& [sym, dst] : dfa.edges[q]) {
            const std::int64_t count = freq.at(static_cast<StateId>(q), dst);
            if (count <= 0) {
                throw DataError("transition without an observation count");
            }
            pdfa.edge_prob[q].emplace_back(count, out_total[q]);
        }
    }

    std::int64_t accept_in_total = 0;
    for (std::size_t q = 0; q < n; ++q) {
        if (dfa.accepting[q]) {
            accept_in_total += in_total[q];
        }
    }
    pdfa.accept_prob.assign(n, Rational::zero());
    if (accept_in_total == 0) {
        // Only possible when every word was empty: the initial state is the
        // unique accepting state and carries all termination mass.
        if (dfa.accepting_count() != 1 || !dfa.accepting[0]) {
            throw DataError("degenerate frequency map: no counts into accepting states");
        }
        pdfa.accept_prob[0] = Rational::one();
    } else {
        for (std::size_t q = 0; q < n; ++q) {
            if (dfa.accepting[q]) {
                pdfa.accept_prob[q] = Rational(in_total[q], accept_in_total);
            }
        }
    }
    return pdfa;
}

Rational word_probability_exact(const Pdfa& pdfa, const Word& word) {
    Rational prob = Rational::one();
    StateId state = pdfa.dfa.initial();
    for (SymbolId symbol : word) {
        if (symbol < 0 || symbol >= pdfa.dfa.symbol_count) {
            return Rational::zero();
        }
        const auto target = pdfa.dfa.next(state, symbol);
        if (!target) {
            return Rational::zero();
        }
        prob *= pdfa.edge_probability(state, symbol);
        state = *target;
    }
    return prob * pdfa.accept_prob[static_cast<std::size_t>(state)];
}

double word_probability(const Pdfa& pdfa, const Word& word) {
    double prob = 1.0;
    StateId state = pdfa.dfa.initial();
    for (SymbolId symbol : word) {
        if (symbol < 0 || symbol >= pdfa.dfa.symbol_count) {
            return 0.0;
        }
        const auto target = pdfa.dfa.next(state, symbol);
        if (!target) {
            return 0.0;
        }
        prob *= pdfa.edge_probability(state, symbol).to_double();
        state = *target;
    }
    return prob * pdfa.accept_prob[static_cast<std::size_t>(state)].to_double();
}

bool accepts(const Pdfa& pdfa, const Word& word) {
    // Equivalent to word_probability(word) > 0: every defined transition has a
    // positive count, so only an undefined transition or zero termination mass
    // can kill the product.
    StateId state = pdfa.dfa.initial();
    for (SymbolId symbol : word) {
        if (symbol < 0 || symbol >= pdfa.dfa.symbol_count) {
            return false;
        }
        const auto target = pdfa.dfa.next(state, symbol);
        if (!target) {
            return false;
        }
        state = *target;
    }
    return !pdfa.accept_prob[static_cast<std::size_t>(state)].is_zero();
}

namespace {

void enumerate_from(const Dfa& dfa, StateId state, Word& prefix, std::vector<Word>& out,
                    std::size_t max_words, bool& truncated) {
    if (truncated) {
        return;
    }
    if (dfa.accepting[static_cast<std::size_t>(state)]) {
        if (max_words != 0 && out.size() >= max_words) {
            truncated = true;
            return;
        }
        out.push_back(prefix);
    }
    for (const auto& [symbol, target] : dfa.edges[static_cast<std::size_t>(state)]) {
        prefix.push_back(symbol);
        enumerate_from(dfa, target, prefix, out, max_words, truncated);
        prefix.pop_back();
    }
}

} // namespace

std::vector<Word> enumerate_language(const Dfa& dfa, std::size_t max_words) {
    std::vector<Word> out;
    Word prefix;
    bool truncated = false;
    enumerate_from(dfa, dfa.initial(), prefix, out, max_words, truncated);
    if (truncated) {
        throw DataError("language enumeration exceeded the cap of " +
                        std::to_string(max_words) + " words");
    }
    return out;
}

std::size_t language_size(const Dfa& dfa, std::size_t cap) {
    // Path counting over the DAG: accepted words are exactly the paths from
    // the initial state to accepting states, and distinct paths spell
    // distinct words because edges between a state pair carry one symbol.
    const auto n = static_cast<std::size_t>(dfa.state_count());
    std::vector<std::size_t> incoming(n, 0);
    std::vector<std::size_t> paths(n, 0);

    // States sorted by popcount of their mask are already topologically
    // ordered: every edge adds exactly one symbol to the completed set.
    std::vector<StateId> order(n);
    for (std::size_t q = 0; q < n; ++q) {
        order[q] = static_cast<StateId>(q);
    }
    std::sort(order.begin(), order.end(), [&](StateId a, StateId b) {
        return std::popcount(dfa.state_masks[static_cast<std::size_t>(a)]) <
               std::popcount(dfa.state_masks[static_cast<std::size_t>(b)]);
    });

    paths[static_cast<std::size_t>(dfa.initial())] = 1;
    std::size_t total = 0;
    for (StateId q : order) {
        const std::size_t count = paths[static_cast<std::size_t>(q)];
        if (count == 0) {
            continue;
        }
        if (dfa.accepting[static_cast<std::size_t>(q)]) {
            total += count;
            if (cap != 0 && total > cap) {
                return total;
            }
        }
        for (const auto& [symbol, target] : dfa.edges[static_cast<std::size_t>(q)]) {
            paths[static_cast<std::size_t>(target)] += count;
        }
    }
    return total;
}

std::string export_dot(const Pdfa& pdfa, const DotOptions& options) {
    const Dfa& dfa = pdfa.dfa;
    std::ostringstream out;
    out << "digraph pdfa {\n";
    out << "    rankdir=LR;\n";
    out << "    node [shape=circle];\n";
    out << "    __start [shape=point, label=\"\"];\n";
    out << "    __start -> q0;\n";
    for (StateId q = 0; q < dfa.state_count(); ++q) {
        out << "    q" << q << " [label=\""
            << mask_label(dfa.state_masks[static_cast<std::size_t>(q)], dfa.symbol_count)
            << "\"";
        if (dfa.accepting[static_cast<std::size_t>(q)]) {
            out << ", shape=doublecircle";
            if (options.probabilities) {
                out << ", xlabel=\"F="
                    << format_prob4(pdfa.accept_prob[static_cast<std::size_t>(q)].to_double())
                    << "\"";
            }
        }
        out << "];\n";
    }
    for (StateId q = 0; q < dfa.state_count(); ++q) {
        const auto& row = dfa.edges[static_cast<std::size_t>(q)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            out << "    q" << q << " -> q" << row[k].second << " [label=\"g" << row[k].first;
            if (options.probabilities) {
                out << " : "
                    << format_prob4(pdfa.edge_prob[static_cast<std::size_t>(q)][k].to_double());
            }
            out << "\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

void write_pdfa(std::ostream& out, const PdfaModel& model) {
    const Dfa& dfa = model.pdfa.dfa;
    if (static_cast<int>(model.subgoals.size()) != dfa.symbol_count) {
        throw DataError("symbol table size does not match the alphabet");
    }
    out << "pdfa 1\n";
    out << "symbols " << dfa.symbol_count << "\n";
    out << "states " << dfa.state_count() << "\n";
    out << "initial " << dfa.initial() << "\n";
    for (const SubGoal& g : model.subgoals) {
        out << "symbol " << g.symbol_id << " subset " << g.subset_id << " indices";
        for (int idx : g.indices) {
            out << ' ' << idx;
        }
        out << " radius " << format_double(g.radius) << " center";
        for (double c : g.center) {
            out << ' ' << format_double(c);
        }
        out << "\n";
    }
    for (StateId q = 0; q < dfa.state_count(); ++q) {
        const Rational& fp = model.pdfa.accept_prob[static_cast<std::size_t>(q)];
        out << "state " << q << " mask " << dfa.state_masks[static_cast<std::size_t>(q)]
            << " accepting " << (dfa.accepting[static_cast<std::size_t>(q)] ? 1 : 0) << " fp "
            << fp.str() << ' ' << format_double(fp.to_double()) << "\n";
    }
    std::size_t transition_count = 0;
    for (StateId q = 0; q < dfa.state_count(); ++q) {
        transition_count += dfa.edges[static_cast<std::size_t>(q)].size();
    }
    out << "transitions " << transition_count << "\n";
    for (StateId q = 0; q < dfa.state_count(); ++q) {
        const auto& row = dfa.edges[static_cast<std::size_t>(q)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            const Rational& p = model.pdfa.edge_prob[static_cast<std::size_t>(q)][k];
            out << "trans " << q << ' ' << row[k].first << ' ' << row[k].second << ' '
                << model.pdfa.freq.at(q, row[k].second) << ' ' << p.str() << ' '
                << format_double(p.to_double()) << "\n";
        }
    }
}

void write_pdfa(const std::filesystem::path& path, const PdfaModel& model) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write PDFA file " + path.string());
    }
    write_pdfa(out, model);
}

namespace {

[[noreturn]] void bad_pdfa(const std::string& origin, const std::string& what) {
    throw DataError(origin + ": invalid PDFA file: " + what);
}

Rational parse_fraction(const std::string& text, const std::string& origin) {
    const std::size_t slash = text.find('/');
    if (slash == std::string::npos) {
        bad_pdfa(origin, "malformed fraction '" + text + "'");
    }
    try {
        const std::int64_t num = std::stoll(text.substr(0, slash));
        const std::int64_t den = std::stoll(text.substr(slash + 1));
        return Rational(num, den);
    } catch (const std::exception&) {
        bad_pdfa(origin, "malformed fraction '" + text + "'");
    }
}

} // namespace

PdfaModel read_pdfa(std::istream& in, const std::string& origin) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "pdfa" || version != 1) {
        bad_pdfa(origin, "missing pdfa header");
    }
    int symbol_count = 0;
    int state_count = 0;
    int initial = 0;
    if (!(in >> word >> symbol_count) || word != "symbols") {
        bad_pdfa(origin, "missing symbols count");
    }
    if (!(in >> word >> state_count) || word != "states") {
        bad_pdfa(origin, "missing states count");
    }
    if (!(in >> word >> initial) || word != "initial" || initial != 0) {
        bad_pdfa(origin, "missing or non-zero initial state");
    }
    if (state_count < 1) {
        bad_pdfa(origin, "state count must be positive");
    }

    PdfaModel model;
    for (int s = 0; s < symbol_count; ++s) {
        SubGoal g;
        if (!(in >> word >> g.symbol_id) || word != "symbol" || g.symbol_id != s) {
            bad_pdfa(origin, "malformed symbol table");
        }
        if (!(in >> word >> g.subset_id) || word != "subset") {
            bad_pdfa(origin, "malformed symbol table");
        }
        if (!(in >> word) || word != "indices") {
            bad_pdfa(origin, "malformed symbol table");
        }
        while (in >> word && word != "radius") {
            try {
                g.indices.push_back(std::stoi(word));
            } catch (const std::exception&) {
                bad_pdfa(origin, "malformed subset index '" + word + "'");
            }
        }
        if (!(in >> g.radius)) {
            bad_pdfa(origin, "malformed symbol radius");
        }
        if (!(in >> word) || word != "center") {
            bad_pdfa(origin, "malformed symbol table");
        }
        g.center.resize(g.indices.size());
        for (double& c : g.center) {
            if (!(in >> c)) {
                bad_pdfa(origin, "malformed symbol center");
            }
        }
        validate_subgoal(g);
        model.subgoals.push_back(std::move(g));
    }

    Dfa dfa;
    dfa.symbol_count = symbol_count;
    dfa.state_masks.resize(static_cast<std::size_t>(state_count));
    dfa.edges.resize(static_cast<std::size_t>(state_count));
    dfa.accepting.resize(static_cast<std::size_t>(state_count));
    std::vector<Rational> stored_fp(static_cast<std::size_t>(state_count));
    for (int q = 0; q < state_count; ++q) {
        int id = 0;
        std::uint64_t mask = 0;
        int accepting = 0;
        std::string fraction;
        double decimal = 0.0;
        if (!(in >> word >> id) || word != "state" || id != q) {
            bad_pdfa(origin, "malformed state table");
        }
        if (!(in >> word >> mask) || word != "mask") {
            bad_pdfa(origin, "malformed state table");
        }
        if (!(in >> word >> accepting) || word != "accepting") {
            bad_pdfa(origin, "malformed state table");
        }
        if (!(in >> word >> fraction >> decimal) || word != "fp") {
            bad_pdfa(origin, "malformed state table");
        }
        dfa.state_masks[static_cast<std::size_t>(q)] = mask;
        dfa.accepting[static_cast<std::size_t>(q)] = accepting ? 1 : 0;
        if (!dfa.mask_index.emplace(mask, q).second) {
            bad_pdfa(origin, "duplicate state mask");
        }
        stored_fp[static_cast<std::size_t>(q)] = parse_fraction(fraction, origin);
    }
    if (dfa.state_masks[0] != 0) {
        bad_pdfa(origin, "initial state must have the empty completed set");
    }

    std::size_t transition_count = 0;
    if (!(in >> word >> transition_count) || word != "transitions") {
        bad_pdfa(origin, "missing transitions count");
    }
    FrequencyMap freq;
    std::vector<Rational> stored_tp;
    std::vector<std::pair<StateId, StateId>> stored_keys;
    for (std::size_t t = 0; t < transition_count; ++t) {
        int src = 0;
        int symbol = 0;
        int dst = 0;
        std::int64_t count = 0;
        std::string fraction;
        double decimal = 0.0;
        if (!(in >> word >> src >> symbol >> dst >> count >> fraction >> decimal) ||
            word != "trans") {
            bad_pdfa(origin, "malformed transition table");
        }
        if (src < 0 || src >= state_count || dst < 0 || dst >= state_count || symbol < 0 ||
            symbol >= symbol_count || count <= 0) {
            bad_pdfa(origin, "transition out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << symbol;
        const std::uint64_t src_mask = dfa.state_masks[static_cast<std::size_t>(src)];
        if ((src_mask & bit) != 0 ||
            dfa.state_masks[static_cast<std::size_t>(dst)] != (src_mask | bit)) {
            bad_pdfa(origin, "transition masks are inconsistent");
        }
        auto& row = dfa.edges[static_cast<std::size_t>(src)];
        const auto pos = std::lower_bound(
            row.begin(), row.end(), symbol,
            [](const std::pair<SymbolId, StateId>& e, SymbolId s) { return e.first < s; });
        if (pos != row.end() && pos->first == symbol) {
            bad_pdfa(origin, "duplicate transition");
        }
        row.insert(pos, {symbol, dst});
        freq.counts[{src, dst}] = count;
        stored_keys.emplace_back(src, dst);
        stored_tp.push_back(parse_fraction(fraction, origin));
    }

    model.pdfa = pdfa_from_counts(dfa, freq);

    // The stored probabilities are redundant with the counts; verify they
    // agree so hand-edited files fail loudly.
    for (std::size_t t = 0; t < stored_keys.size(); ++t) {
        const auto [src, dst] = stored_keys[t];
        const auto& row = model.pdfa.dfa.edges[static_cast<std::size_t>(src)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k].second == dst &&
                model.pdfa.edge_prob[static_cast<std::size_t>(src)][k] != stored_tp[t]) {
                bad_pdfa(origin, "stored transition probability disagrees with counts");
            }
        }
    }
    for (int q = 0; q < state_count; ++q) {
        if (model.pdfa.accept_prob[static_cast<std::size_t>(q)] !=
            stored_fp[static_cast<std::size_t>(q)]) {
            bad_pdfa(origin, "stored termination probability disagrees with counts");
        }
    }
    return model;
}

PdfaModel read_pdfa(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open PDFA file " + path.string());
    }
    return read_pdfa(in, path.string());
}

} // namespace taskspec

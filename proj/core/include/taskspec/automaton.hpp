#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "taskspec/rational.hpp"
#include "taskspec/trace.hpp"
#include "taskspec/wordgen.hpp"

namespace taskspec {

using StateId = int;

// Acyclic DFA whose states stand for sets of completed sub-goals. State ids
// follow creation order during inference; the completed-set bitmask is the
// canonical identity, which makes the construction independent of word order.
struct Dfa {
    int symbol_count = 0;
    std::vector<std::uint64_t> state_masks;                        // id -> completed set
    std::vector<std::vector<std::pair<SymbolId, StateId>>> edges;  // sorted by symbol
    std::vector<char> accepting;
    std::unordered_map<std::uint64_t, StateId> mask_index;

    StateId initial() const { return 0; }
    int state_count() const { return static_cast<int>(state_masks.size()); }
    std::optional<StateId> next(StateId state, SymbolId symbol) const;
    std::vector<StateId> accepting_states() const;
    int accepting_count() const;
};

// Sparse transition-frequency counts keyed by (source, target). At most one
// symbol can connect a state pair here, so the pair identifies the transition.
struct FrequencyMap {
    std::map<std::pair<StateId, StateId>, std::int64_t> counts;

    std::int64_t at(StateId from, StateId to) const;
    std::int64_t total() const;
};

struct InferenceResult {
    Dfa dfa;
    FrequencyMap freq;
};

// Builds the DFA and frequency map from a word multiset. States are created
// lazily, one per newly seen completed-set; each symbol occurrence increments
// the count of the transition it takes; the final state of every word becomes
// accepting. Words must not repeat symbols and must stay inside the alphabet.
InferenceResult infer_dfa(int symbol_count, const std::vector<Word>& words);

// DFA plus exact transition and termination probabilities derived from the
// frequency map: outgoing counts normalized per state, and accepting states
// weighted by their share of incoming counts over all accepting states.
struct Pdfa {
    Dfa dfa;
    FrequencyMap freq;
    std::vector<std::vector<Rational>> edge_prob; // aligned with dfa.edges
    std::vector<Rational> accept_prob;            // per state; zero outside F

    Rational edge_probability(StateId state, SymbolId symbol) const;
};

Pdfa pdfa_from_counts(const Dfa& dfa, const FrequencyMap& freq);

// Probability of a word: product of transition probabilities along its trace
// times the termination probability of the reached state; zero as soon as a
// transition is undefined.
Rational word_probability_exact(const Pdfa& pdfa, const Word& word);
double word_probability(const Pdfa& pdfa, const Word& word);

// True iff the word has non-zero probability.
bool accepts(const Pdfa& pdfa, const Word& word);

// All accepted words, depth-first in symbol order. Finite because the
// transition graph is acyclic (paths are bounded by the alphabet size), but
// can still be factorially large; max_words caps the traversal (0 = no cap).
std::vector<Word> enumerate_language(const Dfa& dfa, std::size_t max_words = 0);
std::size_t language_size(const Dfa& dfa, std::size_t cap = 0);

struct DotOptions {
    bool probabilities = true; // edge probability labels + termination annotations
};

// Graphviz rendering with deterministic node and edge order. Nodes carry the
// completed-set label, accepting states are doubled circles annotated with
// their termination probability; edge labels are "g<symbol> : <prob>" with
// four decimals.
std::string export_dot(const Pdfa& pdfa, const DotOptions& options = {});

// PDFA file: header, symbol table (with sub-goal geometry so planning needs
// no side files), state table (mask, accepting flag, termination probability
// as exact fraction and decimal) and transition table (src, symbol, dst,
// count, probability). Counts are the source of truth; probabilities are
// re-derived on load and checked against the file.
struct PdfaModel {
    Pdfa pdfa;
    std::vector<SubGoal> subgoals; // symbol table, indexed by symbol id
};

void write_pdfa(std::ostream& out, const PdfaModel& model);
void write_pdfa(const std::filesystem::path& path, const PdfaModel& model);
PdfaModel read_pdfa(std::istream& in, const std::string& origin);
PdfaModel read_pdfa(const std::filesystem::path& path);

} // namespace taskspec

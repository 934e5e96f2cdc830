#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskspec/trace.hpp"

namespace taskspec {

using SymbolId = int;

// A word over the sub-goal alphabet. Possibly empty; a symbol never repeats
// because conversion records only first-time completions.
using Word = std::vector<SymbolId>;

// Scans the demonstration in temporal order and appends the symbol of the
// first not-yet-recorded sub-goal the state satisfies, then moves on to the
// next state. Sub-goals are visited in symbol order, so when one state
// completes several new sub-goals at once the lowest symbol wins that state.
// radius_override replaces every sub-goal's own radius (single task-level
// radius mode).
Word demo_to_word(const Demonstration& demo, const std::vector<SubGoal>& goals,
                  std::optional<double> radius_override = std::nullopt);

// One word per demonstration, multiplicity preserved: repeated orderings are
// what carries demonstrator preference downstream.
std::vector<Word> corpus_to_words(const Corpus& corpus, const std::vector<SubGoal>& goals,
                                  std::optional<double> radius_override = std::nullopt);

// Word corpus text format: one word per line, space-separated symbol ids,
// the single token `e` for the empty word.
std::string format_word(const Word& word);
Word parse_word(std::string_view text, const std::string& origin, std::size_t line_no);
void write_words(std::ostream& out, const std::vector<Word>& words);
std::vector<Word> read_words(std::istream& in, const std::string& origin);

} // namespace taskspec

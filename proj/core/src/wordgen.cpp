#include "taskspec/wordgen.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "taskspec/errors.hpp"

namespace taskspec {
namespace {

void check_goals(const std::vector<SubGoal>& goals) {
    if (goals.size() > 64) {
        throw DataError("alphabets beyond 64 sub-goals are not supported");
    }
    for (std::size_t i = 0; i < goals.size(); ++i) {
        if (goals[i].symbol_id != static_cast<int>(i)) {
            throw DataError("sub-goals must be sorted by symbol id 0..|G|-1");
        }
    }
}

} // namespace

Word demo_to_word(const Demonstration& demo, const std::vector<SubGoal>& goals,
                  std::optional<double> radius_override) {
    check_goals(goals);
    Word word;
    std::uint64_t recorded = 0;
    for (const WorldState& state : demo.states) {
        for (const SubGoal& goal : goals) {
            const std::uint64_t bit = std::uint64_t{1} << goal.symbol_id;
            if (recorded & bit) {
                continue;
            }
            const double radius = radius_override.value_or(goal.radius);
            if (satisfies(goal, state, radius)) {
                word.push_back(goal.symbol_id);
                recorded |= bit;
                break; // next state
            }
        }
    }
    return word;
}

std::vector<Word> corpus_to_words(const Corpus& corpus, const std::vector<SubGoal>& goals,
                                  std::optional<double> radius_override) {
    std::vector<Word> words;
    words.reserve(corpus.demos.size());
    for (const Demonstration& demo : corpus.demos) {
        words.push_back(demo_to_word(demo, goals, radius_override));
    }
    return words;
}

std::string format_word(const Word& word) {
    if (word.empty()) {
        return "e";
    }
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += std::to_string(word[i]);
    }
    return out;
}

Word parse_word(std::string_view text, const std::string& origin, std::size_t line_no) {
    Word word;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) -> void {
        throw DataError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
            ++pos;
        }
        if (pos >= text.size()) {
            break;
        }
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t') {
            ++pos;
        }
        const std::string_view token = text.substr(start, pos - start);
        if (token == "e") {
            if (!word.empty() || pos < text.size()) {
                fail("token 'e' must stand alone as the empty word");
            }
            return word;
        }
        int symbol = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), symbol);
        if (ec != std::errc() || ptr != token.data() + token.size() || symbol < 0) {
            fail("malformed symbol '" + std::string(token) + "'");
        }
        word.push_back(symbol);
    }
    if (word.empty()) {
        fail("empty line; use 'e' for the empty word");
    }
    return word;
}

void write_words(std::ostream& out, const std::vector<Word>& words) {
    for (const Word& word : words) {
        out << format_word(word) << '\n';
    }
}

std::vector<Word> read_words(std::istream& in, const std::string& origin) {
    std::vector<Word> words;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        words.push_back(parse_word(line, origin, line_no));
    }
    return words;
}

} // namespace taskspec

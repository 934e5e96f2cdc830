#include "taskspec/demo_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "taskspec/errors.hpp"

namespace taskspec {
namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& origin, std::size_t line, const std::string& what) {
    throw DataError(origin + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

long parse_long(std::string_view field, const std::string& origin, std::size_t line,
                const char* what) {
    field = trim(field);
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        fail_at(origin, line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

Feature parse_feature(std::string_view field, const std::string& origin, std::size_t line,
                      std::size_t position) {
    field = trim(field);
    if (field == "undef") {
        return std::nullopt;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        fail_at(origin, line,
                "malformed feature field " + std::to_string(position) + " '" +
                    std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        fail_at(origin, line,
                "feature field " + std::to_string(position) +
                    " is not finite; use undef for missing values");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

DatasetConfig parse_config(std::istream& in, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid config: " + e.what());
    }

    DatasetConfig config;
    try {
        config.feature_count = doc.at("feature_count").get<std::size_t>();
        if (doc.contains("feature_names")) {
            config.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        }
        const auto& subsets = doc.at("candidate_subsets");
        int id = 0;
        for (const auto& entry : subsets) {
            FeatureSubset subset;
            subset.id = id++;
            subset.indices = entry.get<std::vector<int>>();
            config.candidate_subsets.push_back(std::move(subset));
        }
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid config: " + e.what());
    }

    if (config.feature_count == 0) {
        throw DataError(origin + ": feature_count must be positive");
    }
    if (config.feature_names.empty()) {
        for (std::size_t i = 0; i < config.feature_count; ++i) {
            config.feature_names.push_back("f" + std::to_string(i));
        }
    }
    if (config.feature_names.size() != config.feature_count) {
        throw DataError(origin + ": feature_names length does not match feature_count");
    }
    if (config.candidate_subsets.empty()) {
        throw DataError(origin + ": candidate_subsets must not be empty");
    }
    for (const auto& subset : config.candidate_subsets) {
        validate_subset(subset, config.feature_count);
    }
    return config;
}

DatasetConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path.string());
    }
    return parse_config(in, path.string());
}

void write_config(const std::filesystem::path& path, const DatasetConfig& config) {
    json doc;
    doc["feature_count"] = config.feature_count;
    doc["feature_names"] = config.feature_names;
    json subsets = json::array();
    for (const auto& subset : config.candidate_subsets) {
        subsets.push_back(subset.indices);
    }
    doc["candidate_subsets"] = std::move(subsets);

    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write config file " + path.string());
    }
    out << doc.dump(2) << "\n";
}

Corpus parse_demonstrations(std::istream& in, const DatasetConfig& config,
                            const std::string& origin) {
    Corpus corpus;
    corpus.feature_count = config.feature_count;
    corpus.feature_names = config.feature_names;

    std::string raw;
    std::size_t line_no = 0;
    long current_demo = -1;
    long current_time = -1;
    bool any_record = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != config.feature_count + 2) {
            fail_at(origin, line_no,
                    "expected " + std::to_string(config.feature_count + 2) + " fields, got " +
                        std::to_string(fields.size()));
        }
        const long demo_idx = parse_long(fields[0], origin, line_no, "demo index");
        const long time_idx = parse_long(fields[1], origin, line_no, "time index");
        if (demo_idx < 0 || time_idx < 0) {
            fail_at(origin, line_no, "demo and time indices must be nonnegative");
        }

        if (demo_idx != current_demo) {
            if (demo_idx < current_demo) {
                fail_at(origin, line_no, "lines are not sorted by (demo_index, time_index)");
            }
            corpus.demos.emplace_back();
            current_demo = demo_idx;
            current_time = -1;
        }
        if (time_idx <= current_time) {
            fail_at(origin, line_no, "lines are not sorted by (demo_index, time_index)");
        }
        current_time = time_idx;

        WorldState state;
        state.values.reserve(config.feature_count);
        for (std::size_t i = 0; i < config.feature_count; ++i) {
            state.values.push_back(parse_feature(fields[i + 2], origin, line_no, i));
        }
        corpus.demos.back().states.push_back(std::move(state));
        any_record = true;
    }

    if (!any_record) {
        throw DataError(origin + ": no demonstration records found");
    }
    return corpus;
}

Corpus load_demonstrations(const std::filesystem::path& path, const DatasetConfig& config) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open demonstration file " + path.string());
    }
    return parse_demonstrations(in, config, path.string());
}

void write_demonstrations(std::ostream& out, const Corpus& corpus) {
    for (std::size_t d = 0; d < corpus.demos.size(); ++d) {
        const auto& demo = corpus.demos[d];
        for (std::size_t t = 0; t < demo.states.size(); ++t) {
            out << d << ',' << t;
            for (const Feature& f : demo.states[t].values) {
                out << ',';
                if (f) {
                    out << format_double(*f);
                } else {
                    out << "undef";
                }
            }
            out << '\n';
        }
    }
}

void write_demonstrations(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write demonstration file " + path.string());
    }
    write_demonstrations(out, corpus);
}

} // namespace taskspec

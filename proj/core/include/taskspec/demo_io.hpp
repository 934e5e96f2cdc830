#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "taskspec/trace.hpp"

namespace taskspec {

// Sidecar config declaring the feature schema and the candidate subspaces.
struct DatasetConfig {
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names;
    std::vector<FeatureSubset> candidate_subsets;
};

DatasetConfig load_config(const std::filesystem::path& path);
DatasetConfig parse_config(std::istream& in, const std::string& origin);
void write_config(const std::filesystem::path& path, const DatasetConfig& config);

// Demonstration file: one line per state,
//   demo_index,time_index,f0,...,f{n-1}
// where each feature field is a decimal literal or the token `undef`.
// Lines must be sorted by (demo_index, time_index); blank lines and lines
// starting with '#' are ignored. Errors carry the offending line number.
Corpus load_demonstrations(const std::filesystem::path& path, const DatasetConfig& config);
Corpus parse_demonstrations(std::istream& in, const DatasetConfig& config,
                            const std::string& origin);
void write_demonstrations(std::ostream& out, const Corpus& corpus);
void write_demonstrations(const std::filesystem::path& path, const Corpus& corpus);

} // namespace taskspec

#pragma once

#include <stdexcept>
#include <string>

namespace taskspec {

// Exit-code contract shared with the CLI:
//   0 success, 1 usage/config error, 2 data error, 3 planner stuck.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad flags, bad config values, out-of-range parameters.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data (files, corpora, words).
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace taskspec

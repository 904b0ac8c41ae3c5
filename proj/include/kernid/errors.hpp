#pragma once

#include <stdexcept>
#include <string>

namespace kernid {

/// Invalid experiment configuration or invalid operation arguments.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or unreadable data files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate or failed numerical problem (e.g. vanishing pivot or functional).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kernid

#pragma once

#include <stdexcept>
#include <string>

namespace evfleet {

/// Bad user input: config values, CLI arguments, malformed schemas.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A named column is missing or a dataset cannot be interpreted.
class SchemaError : public ConfigError {
public:
    explicit SchemaError(const std::string& what) : ConfigError(what) {}
};

/// An internal invariant was violated; the run is not trustworthy and must abort.
class ConsistencyError : public std::logic_error {
public:
    explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

} // namespace evfleet

#pragma once

#include <stdexcept>
#include <string>

namespace clockinterf {

/// A fit or iterative solver did not produce a usable answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration. `key_path` names the offending entry
/// (e.g. "noise.atoms_per_point").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& message)
        : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
          key_path_(std::move(key_path)) {}

    [[nodiscard]] const std::string& key_path() const { return key_path_; }

private:
    std::string key_path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace clockinterf

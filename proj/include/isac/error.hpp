// SPDX-License-Identifier: Apache-2.0

#ifndef ISAC_ERROR_HPP
#define ISAC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace isac {

/// SCNR threshold above what the all-LoS allocation can reach.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace isac

#endif // ISAC_ERROR_HPP

#pragma once

#include <stdexcept>
#include <string>

namespace sgp {

/// Bad input: violated preconditions, malformed files, inconsistent shapes.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Filesystem failures (missing file, unwritable directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value where one is required.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ValidationError(what);
    }
}
} // namespace detail

} // namespace sgp

#pragma once

#include <stdexcept>
#include <string>

namespace dgf {

/// Malformed or unusable input data (bad CSV, single-class labels, ...).
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss. Carries the epoch at which the
/// divergence was detected. The CLI maps this to exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, int epoch)
        : std::runtime_error(msg), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace dgf

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crowdnoise {

/// Caller passed a value outside the operation's domain.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Internal protocol broken, e.g. backward called without the forward state it needs.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A file could not be opened, read, written or decoded. Carries the path.
class IoError : public std::runtime_error {
public:
    IoError(std::string path, const std::string& what);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Optimization produced a non-finite loss or gradient.
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::int64_t epoch, std::int64_t step, const std::string& what);
    std::int64_t epoch() const noexcept { return epoch_; }
    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t epoch_;
    std::int64_t step_;
};

}  // namespace crowdnoise

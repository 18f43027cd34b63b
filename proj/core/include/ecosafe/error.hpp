#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecosafe {

// Base of every error thrown by the library. Callers that only need a
// validation/non-validation split can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProfileTooShortError : public Error {
public:
    using Error::Error;
};

class MalformedProfileError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DegenerateBarrierError : public Error {
public:
    using Error::Error;
};

class MalformedSpecError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(double min_time, const std::string& what)
        : Error(what), min_time_(min_time) {}

    // Shortest travel time the problem admits, in seconds.
    [[nodiscard]] double min_achievable_time() const noexcept { return min_time_; }

private:
    double min_time_;
};

class MalformedTrajectoryError : public Error {
public:
    using Error::Error;
};

class DivisionHazardError : public Error {
public:
    using Error::Error;
};

} // namespace ecosafe

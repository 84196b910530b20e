#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace esaccel {

// Every failure raised by the library derives from Error so callers can
// catch the whole family in one place (the CLI maps them to exit codes).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationDiverged : public Error {
public:
    IntegrationDiverged(double time, const std::string& what)
        : Error(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

class HorizonExceeded : public Error {
public:
    HorizonExceeded(double required_t_end, const std::string& what)
        : Error(what), required_t_end_(required_t_end) {}
    /// Trajectory end time that would have satisfied the request.
    [[nodiscard]] double required_t_end() const noexcept { return required_t_end_; }

private:
    double required_t_end_;
};

class SingularSolution : public Error {
public:
    using Error::Error;
};

class DegenerateSamples : public Error {
public:
    using Error::Error;
};

class InvalidG : public Error {
public:
    using Error::Error;
};

class ExtractionOutOfRange : public Error {
public:
    using Error::Error;
};

class EmptyWindow : public Error {
public:
    using Error::Error;
};

class RootNotFound : public Error {
public:
    RootNotFound(double residual_at_seed, const std::string& what)
        : Error(what), residual_at_seed_(residual_at_seed) {}
    [[nodiscard]] double residual_at_seed() const noexcept { return residual_at_seed_; }

private:
    double residual_at_seed_;
};

class HypothesisViolated : public Error {
public:
    HypothesisViolated(double max_residual, const std::string& what)
        : Error(what), max_residual_(max_residual) {}
    [[nodiscard]] double max_residual() const noexcept { return max_residual_; }

private:
    double max_residual_;
};

// Raised by the scenario reader; carries the offending key and line.
class ScenarioParseError : public Error {
public:
    ScenarioParseError(std::string key, int line, const std::string& what)
        : Error(what), key_(std::move(key)), line_(line) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

// A scenario run failed; the underlying library error is attached as a
// nested exception (std::rethrow_if_nested).
class ScenarioRunError : public Error {
public:
    ScenarioRunError(std::string scenario, const std::string& what)
        : Error(what), scenario_(std::move(scenario)) {}
    [[nodiscard]] const std::string& scenario() const noexcept { return scenario_; }

private:
    std::string scenario_;
};

}  // namespace esaccel

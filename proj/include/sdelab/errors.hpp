#pragma once

#include <stdexcept>
#include <string>

namespace sdelab {

// Invalid configuration, model parameters, or statistic/regime mismatch.
// The CLI maps this to exit code 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A path produced a non-finite state or a per-path run had to abort.
// The CLI maps this to exit code 2.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A quadrature failed its node-doubling self-check. Carries both of the
// disagreeing values. The CLI maps this to exit code 3.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& msg, double coarse, double fine)
        : std::runtime_error(msg), value_coarse(coarse), value_fine(fine) {}
    double value_coarse;
    double value_fine;
};

// An estimator was asked for something the record cannot support
// (absorbed path, empty window, zero accumulator).
class AnalysisError : public std::runtime_error {
public:
    explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sdelab

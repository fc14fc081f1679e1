#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hyperdg {

/// Malformed mesh or config input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Invalid mesh connectivity or geometry (degenerate, non-conforming, A1 violations).
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside a projector or solver.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history = {})
        : std::runtime_error(what), history_(std::move(residual_history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace hyperdg

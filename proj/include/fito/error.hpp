#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fito {

// Base for every error raised by the library. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A time, shift or grid that does not sit on the discretization lattice.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// An argument outside the domain on which an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// A coefficient produced a non-finite value while stepping a path.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t path_index)
        : Error(what + " (path " + std::to_string(path_index) + ")"), path_index_(path_index) {}

    std::size_t path_index() const { return path_index_; }

private:
    std::size_t path_index_;
};

// Normal equations of a regression step are numerically singular.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, std::size_t step, double condition)
        : Error(what), step_(step), condition_(condition) {}

    std::size_t step() const { return step_; }
    double condition_number() const { return condition_; }

private:
    std::size_t step_;
    double condition_;
};

// A candidate or functional lacks what an operation needs (e.g. derivative hooks).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fito

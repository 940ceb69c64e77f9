#pragma once

#include <stdexcept>

namespace perpsim {

/// Malformed or inconsistent input data (CSV rows, configs, feeds, schemas).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a valid result
/// (negative radicand, non-convergence, rank deficiency).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace perpsim

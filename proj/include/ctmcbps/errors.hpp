#pragma once

#include <stdexcept>
#include <string>

namespace ctmcbps {

// A caller violated a documented precondition (e.g. an unreachable endpoint).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed input data (series files, sequence files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file could not be opened, written or renamed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite weights or energies encountered while sampling.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ctmcbps

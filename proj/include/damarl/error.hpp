#pragma once

#include <stdexcept>
#include <string>

namespace damarl {

/// Bad input data or configuration (non-finite values, out-of-range fields,
/// checkpoint/architecture mismatch).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (shape mismatch, stepping a
/// finished episode, sampling an under-filled replay buffer).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace damarl

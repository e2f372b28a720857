// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qmce {

/// Violated operation precondition (bad sizes, invalid arguments).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Qubit / element index out of range or duplicated.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Non-finite value where a finite one is required (training aborts on these).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment or world configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file; message names the offending line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qmce

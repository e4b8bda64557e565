#pragma once

#include <stdexcept>
#include <string>

namespace dacl {

// Invalid user-supplied configuration (bad flag, bad config key, bad hyperparameter).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an operation's precondition.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape mismatch between tensor operands; message names the op and shapes.
struct DimensionError : ContractError {
    explicit DimensionError(const std::string& msg) : ContractError(msg) {}
};

// Procedural scene generation could not satisfy its constraints.
struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dacl

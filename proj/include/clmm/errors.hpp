// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace clmm {

// Bad arguments or malformed input data (files, JSON, CSV rows).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A best response does not exist: the supremum is open because the player
// would grab the whole fee share of a range with an arbitrarily small deposit.
class NoMaximizerError : public std::runtime_error {
public:
    explicit NoMaximizerError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clmm

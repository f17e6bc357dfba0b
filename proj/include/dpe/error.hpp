#pragma once

#include <stdexcept>
#include <string>

namespace dpe {

// Precondition or configuration failure. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or corrupted input data (tensor files, reports). Exit code 3.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& what) { throw ValidationError(what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(what);
}

// Non-fatal diagnostics (remainder groups, empty key sets) go through here.
void warn(const std::string& message);

}  // namespace dpe

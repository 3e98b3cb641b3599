#pragma once

#include <stdexcept>
#include <string>

namespace flowkit {

// Bad input or configuration: unreadable files, unresolved manifests,
// schema mismatches. The CLI maps this to exit code 1; anything else
// escaping to main is a runtime failure (exit code 2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flowkit

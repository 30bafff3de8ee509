#pragma once

#include <stdexcept>
#include <string>

namespace sparsebound {

// Caller passed arguments that violate an operation's preconditions.
// The CLI maps this to exit code 1.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

// A computation could not finish: eigensolver non-convergence, packing
// retry budget exhausted, too many estimator failures. Exit code 2.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw precondition_error(what);
}

}  // namespace detail
}  // namespace sparsebound

#pragma once

#include <stdexcept>
#include <string>

namespace matflow {

// Input that violates an operation's precondition (dimension mismatch,
// non-Hermitian argument, unnormalized initial data, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A scalar function was evaluated outside its domain, e.g. log at a
// non-positive eigenvalue.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The generators do not produce a Laplacian with a one-dimensional kernel.
class DegenerateModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace matflow

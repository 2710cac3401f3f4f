#pragma once

#include <stdexcept>
#include <string>

namespace qhier {

/// Bad call-site input: mismatched dimensions, out-of-range sites, empty lists.
class argument_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input violates a physical or structural precondition (e.g. a Hamiltonian
/// that is not hermitian within tolerance, a density matrix with negative
/// eigenvalues).
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested object would exceed the configured dimension cap.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical procedure failed (non-convergence, step size too
/// large for the requested scheme).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qhier

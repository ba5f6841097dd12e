#pragma once

#include <stdexcept>
#include <string>

namespace fracbvp {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Evaluation outside the symbol's domain (e.g. homogeneous symbol at xi = 0).
struct DomainError : Error {
    using Error::Error;
};

// Overflow / non-finite values during evaluation.
struct NumericError : Error {
    using Error::Error;
};

// A computed quantity failed its internal accuracy estimate.
struct AccuracyError : Error {
    using Error::Error;
};

// Grid too coarse or window too small for the requested slice.
struct ResolutionError : Error {
    using Error::Error;
};

// Symbol cannot be factorized (vanishing on the grid, bad asymptotics).
struct FactorizabilityError : Error {
    using Error::Error;
};

// Nonzero winding number: no scalar factorization with index 0.
struct TopologicalObstructionError : Error {
    using Error::Error;
};

// Parity / homogeneity classification failed to stabilize.
struct ClassificationError : Error {
    using Error::Error;
};

// A documented precondition was violated by the caller.
struct PreconditionError : Error {
    using Error::Error;
};

// Iterative or grid-based solve did not reach the requested tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

// Reciprocal of a vanishing plus-factor requested.
struct SingularParametrixError : Error {
    using Error::Error;
};

// Integral with non-integrable weight at the boundary.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace fracbvp

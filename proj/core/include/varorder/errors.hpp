#pragma once

#include <stdexcept>
#include <string>

namespace varorder {

/// Malformed input: bad mesh topology, field length mismatch, bad arguments.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A standing modelling assumption on the order field or the excitation does
/// not hold (bounds on the order, leading excitation term, ...).
class AssumptionViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Linear solver breakdown or an iteration cap was hit.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Curve analysis could not reach a decision (ambiguous slope, too few points).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace varorder

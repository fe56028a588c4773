#ifndef RIGIDITY_ERRORS_HPP
#define RIGIDITY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rigidity {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// integer / spectral analysis
class UnsupportedDegreeError : public Error { public: using Error::Error; };
class AmbiguousModuliError   : public Error { public: using Error::Error; };
class IndeterminateError     : public Error { public: using Error::Error; };
class InvalidPartitionError  : public Error { public: using Error::Error; };

// sub-resonance algebra
class ClosureViolationError  : public Error { public: using Error::Error; };
class SingularLinearPartError: public Error { public: using Error::Error; };
class IllConditionedFitError : public Error {
public:
    IllConditionedFitError(const std::string& msg, double cond)
        : Error(msg), condition_number(cond) {}
    double condition_number;
};
class ResonanceAmbiguityError: public Error { public: using Error::Error; };

// conjugacy solver
class PerturbationTooLargeError : public Error { public: using Error::Error; };
class SlowConvergenceError      : public Error {
public:
    SlowConvergenceError(const std::string& msg, double rate)
        : Error(msg), contraction_rate(rate) {}
    double contraction_rate;
};

// splittings / leaves
class NonDominatedError      : public Error { public: using Error::Error; };
class NotStableError         : public Error { public: using Error::Error; };
class UnclassifiableRateError: public Error { public: using Error::Error; };
class NoConvergenceError     : public Error { public: using Error::Error; };
class HolonomyOutOfChartError: public Error { public: using Error::Error; };

// harness
class ScenarioError          : public Error { public: using Error::Error; };

} // namespace rigidity

#endif

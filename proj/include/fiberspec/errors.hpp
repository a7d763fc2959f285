#ifndef FIBERSPEC_ERRORS_HPP
#define FIBERSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fiberspec {

/// Invalid input: malformed configuration, out-of-range parameters,
/// representation mismatches. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-convergence, loss of positivity).
/// Carries the last residual seen so callers can report it.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace fiberspec

#endif

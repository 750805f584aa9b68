#ifndef GFD_ERRORS_HPP
#define GFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfd {

// Caller broke a precondition (dimension mismatch, mismatched basis, ...).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Requested derivative order exceeds what the kernel supports classically.
struct UnsupportedOrder : std::domain_error {
    explicit UnsupportedOrder(const std::string& what) : std::domain_error(what) {}
};

// Bad configuration value (unsupported smoothness, nonpositive bandwidth, ...).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// An operation needs state (e.g. an assembled Gram block) that is missing.
struct StateError : std::logic_error {
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Cholesky ran out of jitter budget; names the offending pivot index.
struct NumericalRankError : std::runtime_error {
    int index;
    NumericalRankError(const std::string& what, int idx)
        : std::runtime_error(what), index(idx) {}
};

}  // namespace gfd

#endif

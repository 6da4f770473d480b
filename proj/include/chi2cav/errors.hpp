#pragma once

#include <stdexcept>
#include <string>

namespace chi2cav {

// Argument outside the mathematical domain of an operation (negative power,
// N <= 1 for the competing spectrum, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation has no closed form for the requested parameters, e.g. the
// analytic branches with nonzero detunings.
class UnsupportedRegime : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Configuration violates a physical invariant. key() names the offending field(s).
class InvalidConfig : public std::invalid_argument {
public:
    InvalidConfig(std::string key, const std::string& what)
        : std::invalid_argument(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace chi2cav

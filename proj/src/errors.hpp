#pragma once

#include <stdexcept>
#include <string>

namespace fracspde {

// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};

// Requested accuracy could not be reached. Carries the best available
// estimate together with a bound on its error.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& msg, double best_estimate, double error_bound)
        : std::runtime_error(msg), best(best_estimate), bound(error_bound) {}
    double best;
    double bound;
};

// Parameter combination the implementation does not support.
class unsupported_error : public std::runtime_error {
public:
    explicit unsupported_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested grid/domain truncates too much mass.
class truncation_error : public std::runtime_error {
public:
    explicit truncation_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fracspde

#pragma once

#include <stdexcept>
#include <string>

namespace ssde {

// Error taxonomy shared by all modules. The C API maps each type onto a
// distinct status code.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct AlignmentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace ssde

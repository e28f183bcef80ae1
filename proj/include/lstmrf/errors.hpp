#pragma once

#include <stdexcept>
#include <string>

namespace lstmrf {

// Error taxonomy shared by the library and the CLI. The CLI maps each
// category to a process exit code: 0 success, 2 I/O, 3 validation,
// 4 serialization, 5 numerical divergence.
enum class ErrorCategory {
    Io = 2,
    Validation = 3,
    Serialization = 4,
    Divergence = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

    const char* category_name() const {
        switch (category_) {
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Serialization: return "serialization";
        case ErrorCategory::Divergence: return "divergence";
        }
        return "unknown";
    }

private:
    ErrorCategory category_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCategory::Io, message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorCategory::Validation, message) {}
};

class SerializationError : public Error {
public:
    explicit SerializationError(const std::string& message)
        : Error(ErrorCategory::Serialization, message) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& message)
        : Error(ErrorCategory::Divergence, message) {}
};

} // namespace lstmrf

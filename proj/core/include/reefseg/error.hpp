#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace reefseg {

/// Base of every error raised by the library. `kind()` drives CLI exit codes
/// and HTTP status mapping.
class Error : public std::runtime_error {
public:
    enum class Kind { Config, Data, Numerical };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Malformed or unsupported file content (bad magic, truncated payload, bit depth).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(Kind::Data, what) {}
};

/// Filesystem failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(Kind::Data, what) {}
};

/// A precondition on the arguments of an operation was violated.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(Kind::Data, what) {}
};

/// Non-finite likelihoods and similar failures inside a fit.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

/// One or more violations in a pipeline configuration. All of them are kept.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(Kind::Config, join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace reefseg

#pragma once

#include <stdexcept>
#include <string>

namespace rla {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (bad dimensions, p < 2, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// A dense kernel failed (non-convergence, breakdown).
class NumericalError : public Error
{
public:
    using Error::Error;
};

class NotPsdError : public NumericalError
{
public:
    explicit NotPsdError(const std::string& what)
        : NumericalError("not PSD: " + what) {}
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace rla

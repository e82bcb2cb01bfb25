#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or degenerate geometry (self-intersection, failed root bracket).
class GeometryError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

/// Numerical solver failure. Carries the last residual where one exists.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual = -1.0)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace steklov

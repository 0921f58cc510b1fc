#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cle {

// Root of every error the library raises; `kind()` is the stable name used in
// CLI JSON output.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::complex<double> partial, double err_est,
                   std::size_t evaluations)
        : Error(what), partial_(partial), err_est_(err_est), evaluations_(evaluations) {}
    const char* kind() const noexcept override { return "NonConvergence"; }
    std::complex<double> partial_value() const { return partial_; }
    double err_est() const { return err_est_; }
    std::size_t evaluations() const { return evaluations_; }

private:
    std::complex<double> partial_;
    double err_est_;
    std::size_t evaluations_;
};

class PoleHit : public Error {
public:
    PoleHit(const std::string& factor, std::complex<double> arg)
        : Error("pole/zero hit in " + factor + " at (" + std::to_string(arg.real()) + ", " +
                std::to_string(arg.imag()) + ")"),
          factor_(factor), arg_(arg) {}
    const char* kind() const noexcept override { return "PoleHit"; }
    const std::string& factor() const { return factor_; }
    std::complex<double> argument() const { return arg_; }

private:
    std::string factor_;
    std::complex<double> arg_;
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DomainError"; }
};

class ImaginaryLeak : public Error {
public:
    ImaginaryLeak(const std::string& what, std::complex<double> value) : Error(what), value_(value) {}
    const char* kind() const noexcept override { return "ImaginaryLeak"; }
    std::complex<double> value() const { return value_; }

private:
    std::complex<double> value_;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::uint64_t replicate, std::uint64_t events)
        : Error(what), replicate_(replicate), events_(events) {}
    const char* kind() const noexcept override { return "BudgetExceeded"; }
    std::uint64_t replicate() const { return replicate_; }
    std::uint64_t events() const { return events_; }

private:
    std::uint64_t replicate_;
    std::uint64_t events_;
};

class SolverFailure : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "SolverFailure"; }
};

class Degenerate : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "Degenerate"; }
};

}  // namespace cle

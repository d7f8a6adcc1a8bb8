#ifndef KHINCHIN_ERROR_HPP
#define KHINCHIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace khinchin {

/// Base of every library failure. `code()` is the stable machine-readable
/// tag the CLI prints as `error_code`.
class error : public std::runtime_error {
public:
    error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Argument outside the mathematical domain (t >= R, x <= 1 for zeta, ...).
class domain_error : public error {
public:
    explicit domain_error(const std::string& what) : error("domain_error", what) {}
};

/// Bad user input: malformed model spec, invalid parameter, unknown flag.
class validation_error : public error {
public:
    explicit validation_error(const std::string& what) : error("validation_error", what) {}
};

/// A certified tail could not be reached within the term budget.
class budget_exceeded : public error {
public:
    explicit budget_exceeded(const std::string& what) : error("budget_exceeded", what) {}
};

/// Order-K moments are not resolved by the truncated slice.
class tail_too_heavy : public error {
public:
    explicit tail_too_heavy(const std::string& what) : error("tail_too_heavy", what) {}
};

/// The requested analytic route does not exist for this model.
class unsupported_model : public error {
public:
    explicit unsupported_model(const std::string& what) : error("unsupported_model", what) {}
};

/// Zero variance where a normalization needs a positive one.
class degenerate_variance : public error {
public:
    explicit degenerate_variance(const std::string& what) : error("degenerate_variance", what) {}
};

class quadrature_error : public error {
public:
    explicit quadrature_error(const std::string& what) : error("quadrature_error", what) {}
};

/// Two routes that must agree did not.
class consistency_error : public error {
public:
    explicit consistency_error(const std::string& what) : error("consistency_error", what) {}
};

class grid_error : public error {
public:
    explicit grid_error(const std::string& what) : error("grid_too_short", what) {}
};

}  // namespace khinchin

#endif  // KHINCHIN_ERROR_HPP

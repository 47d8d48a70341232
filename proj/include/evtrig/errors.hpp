#pragma once

#include <stdexcept>
#include <string>

namespace evtrig {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A solver produced a result that fails its own residual check.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The closed-loop matrix is not Hurwitz, so no Lyapunov certificate exists.
class NotHurwitzError : public Error {
public:
    using Error::Error;
};

/// Invalid problem configuration (bad margins, inconsistent parameters).
class ConfigError : public Error {
public:
    enum class Kind { NotHurwitz, NonPositiveMargin, BadParameter, BadChannel };

    ConfigError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Channel query outside the schedule horizon.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// Non-empty packet requested while the channel carries no bits.
class InfeasibleTransmission : public Error {
public:
    using Error::Error;
};

/// A record or state violates one of its stated invariants.
class InvariantBreach : public Error {
public:
    using Error::Error;
};

class CausalityError : public Error {
public:
    using Error::Error;
};

/// Exhaustive capacity oracle refused an instance that is too large.
class ScaleGuardError : public Error {
public:
    using Error::Error;
};

/// Scenario document failed validation; carries the offending field path.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The sufficient packet size exceeded the admissible cap at a trigger.
class GuaranteeBreach : public Error {
public:
    using Error::Error;
};

/// V(x) exceeded V_d at some trace sample.
class ObjectiveViolation : public Error {
public:
    using Error::Error;
};

}  // namespace evtrig

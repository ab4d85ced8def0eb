// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace disputekit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeoError : public Error {
public:
    using Error::Error;
};

class RoutingError : public Error {
public:
    using Error::Error;
};

class MutationError : public Error {
public:
    using Error::Error;
};

class RenderError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class RetrievalError : public Error {
public:
    using Error::Error;
};

/// Raised by reasoning backends. `retriable` marks transport-level failures.
class BackendError : public Error {
public:
    BackendError(const std::string& what, bool retriable = true)
        : Error(what), retriable_(retriable) {}
    bool retriable() const noexcept { return retriable_; }

private:
    bool retriable_;
};

/// Refiner output could not be parsed into the tagged blocks.
class RefineParseError : public Error {
public:
    using Error::Error;
};

/// A verdict string that is not a member of the ordinal label space.
class LabelSpaceError : public Error {
public:
    using Error::Error;
};

/// Pipeline failure annotated with the stage that produced it.
class AdjudicationError : public Error {
public:
    AdjudicationError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class RewardError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// Configuration violation; `field` is the JSON path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace disputekit

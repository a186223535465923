#pragma once

#include <stdexcept>
#include <string>

namespace gerbecal {

struct MissingVariable : std::runtime_error {
    explicit MissingVariable(const std::string& name)
        : std::runtime_error("missing variable: " + name), variable(name) {}
    std::string variable;
};

// Raised on log of a non-positive argument, division by zero, 0^negative.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what, std::string witness_point = "")
        : std::runtime_error(what), witness(std::move(witness_point)) {}
    std::string witness;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t offset_)
        : std::runtime_error(what + " (offset " + std::to_string(offset_) + ")"),
          offset(offset_) {}
    std::size_t offset;
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& key)
        : std::runtime_error("missing or malformed key: " + key), key_path(key) {}
    std::string key_path;
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct DegreeError : std::runtime_error {
    explicit DegreeError(const std::string& what) : std::runtime_error(what) {}
};

struct DepthExceeded : std::runtime_error {
    explicit DepthExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct GluingMismatch : std::runtime_error {
    GluingMismatch(const std::string& what, std::string witness_)
        : std::runtime_error(what), witness(std::move(witness_)) {}
    std::string witness;
};

struct CurvatureMismatch : std::runtime_error {
    explicit CurvatureMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionFailed : std::runtime_error {
    explicit PreconditionFailed(const std::string& hypothesis)
        : std::runtime_error("precondition failed: " + hypothesis), hypothesis(hypothesis) {}
    std::string hypothesis;
};

struct NotInKernel : std::runtime_error {
    explicit NotInKernel(const std::string& what) : std::runtime_error(what) {}
};

struct NoHamiltonianField : std::runtime_error {
    explicit NoHamiltonianField(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownSuite : std::runtime_error {
    explicit UnknownSuite(const std::string& name)
        : std::runtime_error("unknown suite: " + name) {}
};

struct UnsupportedExactnessCheck : std::runtime_error {
    explicit UnsupportedExactnessCheck(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gerbecal

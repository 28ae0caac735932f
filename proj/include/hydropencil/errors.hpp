#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydropencil {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// expression layer

struct SyntaxError : Error {
    std::size_t position;
    SyntaxError(const std::string& msg, std::size_t pos)
        : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

struct UnknownIdentifier : Error {
    std::string name;
    explicit UnknownIdentifier(const std::string& ident)
        : Error("unknown identifier '" + ident + "'"), name(ident) {}
    UnknownIdentifier(const std::string& ident, std::size_t pos)
        : Error("unknown identifier '" + ident + "' (at position " + std::to_string(pos) + ")"),
          name(ident) {}
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by zero expression") {}
};

struct DivisionByZeroConstant : Error {
    explicit DivisionByZeroConstant(std::size_t pos)
        : Error("division by a zero denominator (at position " + std::to_string(pos) + ")") {}
};

struct SubstitutionPole : Error {
    SubstitutionPole() : Error("substitution makes a denominator vanish identically") {}
};

struct NumericPole : Error {
    explicit NumericPole(double den)
        : Error("denominator evaluates to " + std::to_string(den) + ", below the pole guard") {}
};

// geometry / operator layer

struct DegenerateMetric : Error {
    DegenerateMetric() : Error("metric determinant vanishes identically") {}
};

struct InvalidMap : Error {
    explicit InvalidMap(const std::string& msg) : Error("invalid coordinate map: " + msg) {}
};

struct NonConstantEta : Error {
    NonConstantEta() : Error("eta must be a constant symmetric nondegenerate matrix") {}
};

struct DegeneratePencil : Error {
    DegeneratePencil() : Error("pencil g1 + lambda*g2 is degenerate identically in lambda") {}
};

struct NotIntegrable : Error {
    NotIntegrable() : Error("mixed-partial integrability check failed") {}
};

struct GMismatch : Error {
    GMismatch() : Error("recovered vector field fails the metric-part identity") {}
};

struct NonPolynomial : Error {
    explicit NonPolynomial(const std::string& what)
        : Error(what + " has a non-constant denominator; integration path undefined") {}
};

struct NotExact : Error {
    int step;
    explicit NotExact(int at_step = -1)
        : Error(at_step >= 0 ? "flow is not exact at hierarchy step " + std::to_string(at_step)
                             : "flow matrix is not exact"),
          step(at_step) {}
};

// simulation layer

struct OddGridSpectral : Error {
    OddGridSpectral() : Error("spectral derivative requires an even grid size") {}
};

struct BlowUp : Error {
    double time;
    explicit BlowUp(double t)
        : Error("gradient blow-up guard triggered at t = " + std::to_string(t)), time(t) {}
};

// manifest layer

struct ManifestError : Error {
    std::string field;
    ManifestError(const std::string& field_path, const std::string& msg)
        : Error("manifest field '" + field_path + "': " + msg), field(field_path) {}
};

}  // namespace hydropencil

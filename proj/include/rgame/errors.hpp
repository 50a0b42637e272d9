#pragma once

#include <stdexcept>
#include <string>

namespace rgame {

// Thrown on any dimension disagreement; message carries both shapes.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Token id outside the vocabulary.
struct VocabError : std::runtime_error {
    explicit VocabError(const std::string& what) : std::runtime_error(what) {}
};

// Class label outside [0, num_classes).
struct LabelError : std::runtime_error {
    explicit LabelError(const std::string& what) : std::runtime_error(what) {}
};

// Zero-length sequence where at least one token is required.
struct EmptyInputError : std::runtime_error {
    explicit EmptyInputError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite gradient encountered during an optimizer step.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; message carries the line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent or out-of-range configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Requested exhaustive search is too large to run.
struct FeasibilityError : std::runtime_error {
    explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

// Metric requested over examples that lack the needed annotation.
struct AnnotationError : std::runtime_error {
    explicit AnnotationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rgame

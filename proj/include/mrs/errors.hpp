#pragma once

#include <stdexcept>
#include <string>

namespace mrs {

// Bad input from the outside world (files, CLI values). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad flag/argument combinations. CLI exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A nonterminating series failed the tolerance criterion within max_terms.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computed pmf coefficient came out negative; the theta sign convention
// of the family was almost certainly misused.
struct NegativeMassError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A denominator factor of the factorial-moment ratio constant vanishes.
struct SingularParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contingency table with zero effective degrees of freedom.
struct DegenerateTableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model/data regeneration gave up after max_retries attempts.
struct ExhaustedRetriesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mrs

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace avir {

/// Base class for every error raised by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called with arguments that violate its preconditions.
class invalid_input_error : public error {
 public:
  using error::error;
};

/// A file or line could not be decoded; the message names the location.
class parse_error : public error {
 public:
  using error::error;
};

/// Decoded data violates a schema or range rule (out-of-range score,
/// duplicate id, misaligned corpus, ...).
class validation_error : public error {
 public:
  using error::error;
};

/// Filesystem access failed; the message carries the path.
class io_error : public error {
 public:
  using error::error;
};

/// A remote backend did not produce a usable response within the retry budget.
class backend_unavailable_error : public error {
 public:
  using error::error;
};

/// A replay cache or mock has no entry for the requested key.
class not_found_error : public error {
 public:
  using error::error;
};

/// A backend returned a completion with no text.
class empty_answer_error : public error {
 public:
  using error::error;
};

}  // namespace avir

// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fixbound {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a documented precondition (mismatched universes,
/// invalid interval where a valid one is required, ...).
class usage_error : public error {
public:
  explicit usage_error(const std::string& what) : error(what) {}
};

/// Input text could not be parsed. Carries a 1-based source position.
class parse_error : public error {
public:
  parse_error(const std::string& what, std::size_t line, std::size_t column)
      : error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}

  std::size_t line;
  std::size_t column;
};

/// A computation would exceed a configured resource cap (enumeration size,
/// grounding instances, ...).
class resource_cap_error : public error {
public:
  explicit resource_cap_error(const std::string& what) : error(what) {}
};

/// The lattice in use does not provide a capability required by the
/// requested operation (cardinality, interval enumeration).
class unsupported_capability_error : public error {
public:
  explicit unsupported_capability_error(const std::string& what) : error(what) {}
};

/// An internal invariant failed. Indicates a bug, never bad input.
class invariant_error : public error {
public:
  explicit invariant_error(const std::string& what) : error(what) {}
};

}  // namespace fixbound

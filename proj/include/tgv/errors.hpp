// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tgv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized input (bad JSON, wrong field types).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Unknown operator, bad arity, bad or missing attributes, dangling references.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range values for an operator's input domain (e.g. embedding index).
class DomainError : public Error {
 public:
  using Error::Error;
};

class AttrError : public Error {
 public:
  using Error::Error;
};

/// Misuse of an API (unknown e-class id and the like).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the verification engine, usually a re-execution error.
class EngineError : public Error {
 public:
  using Error::Error;
};

/// Fixture generation could not find the structure it was asked to mutate.
class StructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace tgv

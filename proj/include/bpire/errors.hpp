// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/errors.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bpire
{
/// Base of every library error.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define BPIRE_DEFINE_ERROR(NAME)      \
    class NAME : public Error         \
    {                                 \
      public:                         \
        using Error::Error;           \
    }

BPIRE_DEFINE_ERROR(InvalidParameter);
BPIRE_DEFINE_ERROR(QuadratureFailure);
BPIRE_DEFINE_ERROR(SeriesDivergence);
BPIRE_DEFINE_ERROR(Overflow);
BPIRE_DEFINE_ERROR(NotSubcritical);
BPIRE_DEFINE_ERROR(EmptyInput);
BPIRE_DEFINE_ERROR(ReferenceVanishes);
BPIRE_DEFINE_ERROR(DegenerateOrderStats);
BPIRE_DEFINE_ERROR(NonPositiveValue);
BPIRE_DEFINE_ERROR(PmfUnavailable);
BPIRE_DEFINE_ERROR(NoConvergence);
BPIRE_DEFINE_ERROR(ResidualTooLarge);
BPIRE_DEFINE_ERROR(IoError);

#undef BPIRE_DEFINE_ERROR

/// Config syntax error; carries the 1-based line number.
class ParseError : public Error
{
  public:
    ParseError(int line, std::string const& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// Semantically invalid config value; carries the offending field name.
class ValidationError : public Error
{
  public:
    ValidationError(std::string field, std::string const& what)
        : Error(field + ": " + what), field_(std::move(field))
    {
    }
    std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace bpire

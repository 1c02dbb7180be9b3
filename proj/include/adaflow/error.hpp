// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace adaflow {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Frame, clip, or token index outside its valid range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Malformed AFTN file. `field()` names the header field or section at fault.
class FormatError : public Error {
public:
    FormatError(std::string field, const std::string& what)
        : Error("format error in '" + field + "': " + what), m_field(std::move(field)) {}

    const std::string& field() const noexcept { return m_field; }

private:
    std::string m_field;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be processed (bad values, missing outputs). CLI exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace adaflow

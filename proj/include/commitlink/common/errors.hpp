#pragma once

#include <stdexcept>
#include <string>

namespace commitlink {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments. Maps to CLI exit status 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A stage was started before the artifacts it consumes exist. Exit status 1.
class PrerequisiteError : public Error {
public:
    using Error::Error;
};

/// Input data cannot support the requested computation. Exit status 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Unreadable or unwritable file. Exit status 2.
class IoError : public Error {
public:
    using Error::Error;
};

/// A remote endpoint failed after all retries. Callers may fall back.
class RemoteError : public Error {
public:
    using Error::Error;
};

} // namespace commitlink

#pragma once

#include <stdexcept>
#include <string>

namespace synapseroute {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- dataset / record errors ------------------------------------------------

class MalformedRecord : public Error {
public:
    using Error::Error;
};

class TooFewItems : public Error {
public:
    using Error::Error;
};

class TargetTooLarge : public Error {
public:
    using Error::Error;
};

class BadFractions : public Error {
public:
    using Error::Error;
};

// --- backend errors ----------------------------------------------------------

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class BackendProtocol : public Error {
public:
    using Error::Error;
};

class Timeout : public BackendUnavailable {
public:
    using BackendUnavailable::BackendUnavailable;
};

// --- embedding errors ---------------------------------------------------------

class EmbeddingUnavailable : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// --- labeling errors ----------------------------------------------------------

class EmptyAfterFilter : public Error {
public:
    using Error::Error;
};

class PipelineFailed : public Error {
public:
    explicit PipelineFailed(const std::string& what, std::size_t completed = 0)
        : Error(what), completed_records(completed) {}
    std::size_t completed_records;
};

// --- classifier errors ----------------------------------------------------------

class SingleClass : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

// --- evaluator errors -----------------------------------------------------------

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class IdMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class BadConfidence : public Error {
public:
    using Error::Error;
};

// --- io / persistence -------------------------------------------------------------

class IoError : public Error {
public:
    using Error::Error;
};

class SchemaVersionMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace synapseroute

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace taskimp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& location, const std::string& what)
        : Error(location + ": " + what), location_(location) {}
    const std::string& location() const { return location_; }

private:
    std::string location_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class UnknownTask : public Error {
public:
    explicit UnknownTask(const std::string& task_id)
        : Error("unknown task: " + task_id) {}
};

class DuplicateId : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyIndex : public Error {
public:
    EmptyIndex() : Error("search on empty index") {}
};

class EmptyText : public Error {
public:
    EmptyText() : Error("cannot embed empty text") {}
};

class EmptyTrace : public Error {
public:
    EmptyTrace() : Error("metrics require a non-empty trace") {}
};

class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

/// The VLM client answered "unsure"; carries the question that stalled.
class UnsureAnswer : public Error {
public:
    explicit UnsureAnswer(std::string question)
        : Error("vlm answered unsure to: " + question), question_(std::move(question)) {}
    const std::string& question() const { return question_; }

private:
    std::string question_;
};

/// Integrator produced a non-finite state (unstable dt/parameter combination).
class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// Wraps an error raised inside run_pipeline, annotated with the stage name.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace taskimp

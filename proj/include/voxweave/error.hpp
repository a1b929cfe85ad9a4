#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace voxweave {

// Base for every error the runtime raises on bad input or protocol misuse.
// Anything else escaping a public call is an internal fault.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Audio token id outside the configured vocabulary.
class InvalidToken : public Error {
public:
    InvalidToken(std::size_t index, std::uint32_t id)
        : Error("audio token " + std::to_string(id) + " at index " + std::to_string(index) +
                " is out of vocabulary"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class MalformedSequence : public Error {
public:
    MalformedSequence(std::size_t position, const std::string& what)
        : Error("malformed interleaved sequence at position " + std::to_string(position) + ": " +
                what),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class EmptyAudio : public Error {
public:
    EmptyAudio() : Error("audio clip is empty") {}
};

class RateMismatch : public Error {
public:
    using Error::Error;
};

class ContextOverflow : public Error {
public:
    using Error::Error;
};

class SilenceRejected : public Error {
public:
    SilenceRejected() : Error("no speech detected in input audio") {}
};

class BackendProtocolError : public Error {
public:
    using Error::Error;
};

class UnknownTool : public Error {
public:
    explicit UnknownTool(const std::string& name) : Error("unknown tool '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class MissingParameter : public Error {
public:
    explicit MissingParameter(const std::string& param)
        : Error("missing required parameter '" + param + "'"), param_(param) {}
    const std::string& parameter() const noexcept { return param_; }

private:
    std::string param_;
};

class UnexpectedParameter : public Error {
public:
    explicit UnexpectedParameter(const std::string& param)
        : Error("unexpected parameter '" + param + "'"), param_(param) {}
    const std::string& parameter() const noexcept { return param_; }

private:
    std::string param_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : Error("tool call parse error at offset " + std::to_string(offset) + ": " + what),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EmptyLibrary : public Error {
public:
    EmptyLibrary() : Error("voice library is empty") {}
};

class EmptyReference : public Error {
public:
    EmptyReference() : Error("reference is empty after normalization") {}
};

class GroupTooSmall : public Error {
public:
    explicit GroupTooSmall(std::size_t size)
        : Error("reward group of size " + std::to_string(size) + " is too small (need >= 2)") {}
};

class WireError : public Error {
public:
    using Error::Error;
};

}  // namespace voxweave

#pragma once

#include <stdexcept>
#include <string>

namespace seqslam {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The difference matrix does not yet hold a full sequence.
class NotReady : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A query lies outside the range covered by ground truth anchors.
class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace seqslam

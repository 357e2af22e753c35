#pragma once

#include <stdexcept>
#include <string>

namespace p4green {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Codec errors.
class MalformedPacket : public Error { using Error::Error; };
class IndexOutOfRange : public Error { using Error::Error; };
class NotAnInfoPacket : public Error { using Error::Error; };
class ServerIdOverflow : public Error { using Error::Error; };
class MissingTimestampOption : public Error { using Error::Error; };

// Pipeline / register guards.
class WidthOutOfRange : public Error { using Error::Error; };
class ClockRegression : public Error { using Error::Error; };

// Files that cannot be opened or written.
class FileError : public Error { using Error::Error; };

// Scenario loading.
class ParseError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };

}  // namespace p4green

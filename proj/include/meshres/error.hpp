// Exception types shared across the library. Every failure surfaces as one
// of these so callers (and the CLI) can map them to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace meshres {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct DegenerateFaceError : Error { using Error::Error; };
struct IsolatedVertexError : Error { using Error::Error; };
struct EmptyResultError : Error { using Error::Error; };
struct ThirdMolarError : Error { using Error::Error; };
struct UnknownLabelError : Error { using Error::Error; };
struct TargetUnreachableError : Error { using Error::Error; };
struct InsufficientSourceError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DatasetTooSmallError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace meshres

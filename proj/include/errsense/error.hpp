#pragma once

#include <stdexcept>
#include <string>

namespace errsense {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map a category onto an exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class LengthError : public Error { using Error::Error; };
class DegenerateInputError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class DivergenceError : public Error { using Error::Error; };
class DegenerateLabelError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class InvariantError : public Error { using Error::Error; };

} // namespace errsense

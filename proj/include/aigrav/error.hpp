#ifndef AIGRAV_ERROR_HPP
#define AIGRAV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace aigrav {

// Rejected input. `field()` is a dotted path to the offending value
// (e.g. "noise.shaped_bands[1].f_hi") when one is known.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        message_(what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }
  // what() without the field prefix
  const std::string& message() const noexcept { return message_; }

private:
  std::string message_;
  std::string field_;
};

// A computation that could not produce a meaningful result
// (non-convergent fit, unresolved fringe ambiguity, degenerate demodulation).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace aigrav

#endif  // AIGRAV_ERROR_HPP

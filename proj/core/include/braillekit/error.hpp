#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace braillekit {

// Every failure raised by the library carries a short machine-readable kind
// (e.g. "InvalidChar", "DuplicateToken") next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// An error that points at a position (byte or code point, see the raising
// function) inside its input.
class PositionedError : public Error {
 public:
  PositionedError(std::string kind, std::size_t position, const std::string& message)
      : Error(std::move(kind), message), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace braillekit

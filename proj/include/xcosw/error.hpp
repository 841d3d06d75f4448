#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcosw {

/// Failure categories raised by the library. Every exception thrown by
/// xcosw code derives from xcosw::Error and carries one of these.
enum class Errc {
  UnknownKind,
  UnknownParam,
  PortOccupied,
  BadEndpoint,
  DuplicateId,
  InvalidText,
  XmlSyntax,
  MissingRootCells,
  OrphanCell,
  SchemaViolation,
  ExprSyntax,
  WrongShape,
  ImproperTF,
  UnsetParam,
  NotSampled,
  AlgebraicLoop,
  NotValidated,
  InvalidOptions,
  NonFinite,
  StepUnderflow,
  Timeout,
  Io,
};

/// Stable identifier such as "PortOccupied".
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// ExprSyntax or WrongShape, located at a 0-based offset into the raw text.
class ExprError : public Error {
public:
  ExprError(Errc code, std::size_t offset, const std::string &message);

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// SchemaViolation tagged with the JSON path of the offending field.
class SchemaError : public Error {
public:
  SchemaError(std::string path, const std::string &message);

  [[nodiscard]] const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

/// AlgebraicLoop with the block ids of the offending cycle.
class LoopError : public Error {
public:
  explicit LoopError(std::vector<std::string> nodes);

  [[nodiscard]] const std::vector<std::string> &nodes() const noexcept {
    return nodes_;
  }

private:
  std::vector<std::string> nodes_;
};

} // namespace xcosw

#include "xcosw/error.hpp"

namespace xcosw {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::UnknownKind: return "UnknownKind";
  case Errc::UnknownParam: return "UnknownParam";
  case Errc::PortOccupied: return "PortOccupied";
  case Errc::BadEndpoint: return "BadEndpoint";
  case Errc::DuplicateId: return "DuplicateId";
  case Errc::InvalidText: return "InvalidText";
  case Errc::XmlSyntax: return "XmlSyntax";
  case Errc::MissingRootCells: return "MissingRootCells";
  case Errc::OrphanCell: return "OrphanCell";
  case Errc::SchemaViolation: return "SchemaViolation";
  case Errc::ExprSyntax: return "ExprSyntax";
  case Errc::WrongShape: return "WrongShape";
  case Errc::ImproperTF: return "ImproperTF";
  case Errc::UnsetParam: return "UnsetParam";
  case Errc::NotSampled: return "NotSampled";
  case Errc::AlgebraicLoop: return "AlgebraicLoop";
  case Errc::NotValidated: return "NotValidated";
  case Errc::InvalidOptions: return "InvalidOptions";
  case Errc::NonFinite: return "NonFinite";
  case Errc::StepUnderflow: return "StepUnderflow";
  case Errc::Timeout: return "Timeout";
  case Errc::Io: return "Io";
  }
  return "Unknown";
}

ExprError::ExprError(Errc code, std::size_t offset, const std::string &message)
    : Error(code, message + " at column " + std::to_string(offset + 1)),
      offset_(offset) {}

SchemaError::SchemaError(std::string path, const std::string &message)
    : Error(Errc::SchemaViolation, path + ": " + message),
      path_(std::move(path)) {}

namespace {
std::string loop_message(const std::vector<std::string> &nodes) {
  std::string msg = "algebraic loop through blocks";
  for (const auto &n : nodes) {
    msg += ' ';
    msg += n;
  }
  return msg;
}
} // namespace

LoopError::LoopError(std::vector<std::string> nodes)
    : Error(Errc::AlgebraicLoop, loop_message(nodes)),
      nodes_(std::move(nodes)) {}

} // namespace xcosw

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xcosw::detail {

/// Element tree with attributes in document order. Character data is dropped.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlElement> children;

  [[nodiscard]] const std::string *attr(std::string_view key) const;
  [[nodiscard]] const XmlElement *child(std::string_view child_name) const;
};

/// Throws Error(XmlSyntax) with expat's line/column on malformed input.
/// Document type declarations are rejected and nesting is capped.
XmlElement parse_xml(std::string_view bytes);

/// Escapes text for use inside a double-quoted attribute value.
std::string escape_attr(std::string_view text);

/// Minimal pretty-printing writer for element trees with attributes only.
class XmlWriter {
public:
  XmlWriter();

  void open(std::string_view name, const std::vector<std::pair<std::string, std::string>> &attrs);
  void empty(std::string_view name, const std::vector<std::pair<std::string, std::string>> &attrs);
  void close(std::string_view name);

  [[nodiscard]] std::string take() { return std::move(out_); }

private:
  void start_tag(std::string_view name,
                 const std::vector<std::pair<std::string, std::string>> &attrs);

  std::string out_;
  std::size_t depth_ = 0;
};

} // namespace xcosw::detail

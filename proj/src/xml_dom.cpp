#include "xml_dom.hpp"

#include "xcosw/error.hpp"

#include <expat.h>

#include <climits>
#include <memory>

namespace xcosw::detail {

namespace {

constexpr std::size_t kMaxDepth = 256;

struct ParseState {
  XML_Parser parser = nullptr;
  std::vector<XmlElement> stack;
  XmlElement root;
  bool have_root = false;
  std::string failure;
};

void fail(ParseState &st, std::string message) {
  if (st.failure.empty()) st.failure = std::move(message);
  XML_StopParser(st.parser, XML_FALSE);
}

void XMLCALL on_start(void *user, const XML_Char *name, const XML_Char **atts) {
  auto &st = *static_cast<ParseState *>(user);
  if (st.stack.size() >= kMaxDepth) {
    fail(st, "elements nested deeper than " + std::to_string(kMaxDepth));
    return;
  }
  XmlElement el;
  el.name = name;
  for (std::size_t i = 0; atts[i] != nullptr; i += 2) el.attrs.emplace_back(atts[i], atts[i + 1]);
  st.stack.push_back(std::move(el));
}

void XMLCALL on_end(void *user, const XML_Char *) {
  auto &st = *static_cast<ParseState *>(user);
  if (st.stack.empty()) return;
  XmlElement el = std::move(st.stack.back());
  st.stack.pop_back();
  if (st.stack.empty()) {
    st.root = std::move(el);
    st.have_root = true;
  } else {
    st.stack.back().children.push_back(std::move(el));
  }
}

void XMLCALL on_doctype(void *user, const XML_Char *, const XML_Char *, const XML_Char *, int) {
  fail(*static_cast<ParseState *>(user), "document type declarations are not accepted");
}

struct ParserDeleter {
  void operator()(XML_ParserStruct *p) const { XML_ParserFree(p); }
};

} // namespace

const std::string *XmlElement::attr(std::string_view key) const {
  for (const auto &[k, v] : attrs)
    if (k == key) return &v;
  return nullptr;
}

const XmlElement *XmlElement::child(std::string_view child_name) const {
  for (const auto &c : children)
    if (c.name == child_name) return &c;
  return nullptr;
}

XmlElement parse_xml(std::string_view bytes) {
  if (bytes.size() > static_cast<std::size_t>(INT_MAX))
    throw Error(Errc::XmlSyntax, "document too large");
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
  if (!parser) throw Error(Errc::XmlSyntax, "cannot create XML parser");

  ParseState st;
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetStartDoctypeDeclHandler(parser.get(), on_doctype);

  const auto status =
      XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
  if (status != XML_STATUS_OK || !st.have_root) {
    const auto line = XML_GetCurrentLineNumber(parser.get());
    const auto column = XML_GetCurrentColumnNumber(parser.get());
    std::string reason = !st.failure.empty() ? st.failure
                         : status != XML_STATUS_OK
                             ? std::string(XML_ErrorString(XML_GetErrorCode(parser.get())))
                             : std::string("no root element");
    throw Error(Errc::XmlSyntax, "line " + std::to_string(line) + ", column " +
                                     std::to_string(column + 1) + ": " + reason);
  }
  return std::move(st.root);
}

std::string escape_attr(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\t': out += "&#9;"; break;
    case '\n': out += "&#10;"; break;
    case '\r': out += "&#13;"; break;
    default: out += c;
    }
  }
  return out;
}

XmlWriter::XmlWriter() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

void XmlWriter::start_tag(std::string_view name,
                          const std::vector<std::pair<std::string, std::string>> &attrs) {
  out_.append(depth_ * 2, ' ');
  out_ += '<';
  out_ += name;
  for (const auto &[k, v] : attrs) {
    out_ += ' ';
    out_ += k;
    out_ += "=\"";
    out_ += escape_attr(v);
    out_ += '"';
  }
}

void XmlWriter::open(std::string_view name,
                     const std::vector<std::pair<std::string, std::string>> &attrs) {
  start_tag(name, attrs);
  out_ += ">\n";
  ++depth_;
}

void XmlWriter::empty(std::string_view name,
                      const std::vector<std::pair<std::string, std::string>> &attrs) {
  start_tag(name, attrs);
  out_ += "/>\n";
}

void XmlWriter::close(std::string_view name) {
  --depth_;
  out_.append(depth_ * 2, ' ');
  out_ += "</";
  out_ += name;
  out_ += ">\n";
}

} // namespace xcosw::detail

#pragma once

#include "xcosw/diagram.hpp"

#include <string>
#include <string_view>

namespace xcosw {

/// Reads an Xcos-style diagram document.
///
/// Recognized subset: the XcosDiagram root (background, title and run
/// settings), mxGraphModel/root with cells "0" and "1", block cells (any
/// element carrying interfaceFunctionName) with an optional
/// `ScilabString as="exprs"` parameter list and `mxGeometry`, and link cells
/// (elements named *Link) whose source/target name either a block (port taken
/// from sourcePort/targetPort, 0-based) or a desktop-style port cell
/// (*InputPort/*OutputPort, 1-based `ordering`). Every other attribute on the
/// root, blocks and links is kept verbatim in `attrs`.
///
/// Throws Error with XmlSyntax, MissingRootCells, DuplicateId, OrphanCell,
/// BadEndpoint or PortOccupied.
Diagram parse_xcos_xml(std::string_view bytes);

/// Writes the document parse_xcos_xml reads. Well-known attributes come
/// first, then preserved attributes in key order; output is deterministic.
std::string serialize_xcos_xml(const Diagram &d);

} // namespace xcosw

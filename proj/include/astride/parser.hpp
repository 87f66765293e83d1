#pragma once

#include <string>
#include <string_view>

#include "astride/diagram.hpp"

namespace astride {

// Parses the supported Mermaid flowchart subset:
//   flowchart TD|LR
//   %% comment            (a "%% title: ..." comment names the diagram)
//   id[label] id(label) id[(label)] id([label]) id((label))
//   a --> b               a -->|label| b
//   subgraph id[label] ... end      (nestable)
// Ids referenced by an edge but never declared become rectangle nodes labeled
// with their own id. Labels may not contain brackets, braces, pipes, or
// quotes.
DiagramGraph parse_diagram(std::string_view source);

// Canonical form: header, title comment, unbounded node declarations,
// boundary blocks parent-first, then edges; two-space indent per nesting
// level. parse_diagram(serialize_diagram(g)) is structurally equal to g.
std::string serialize_diagram(const DiagramGraph& g);

}  // namespace astride

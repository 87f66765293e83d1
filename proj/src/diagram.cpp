#include "astride/diagram.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "astride/parser.hpp"
#include "astride/util.hpp"

namespace astride {

std::string_view to_string(NodeShape shape) {
  switch (shape) {
    case NodeShape::Rectangle: return "rectangle";
    case NodeShape::Rounded: return "rounded";
    case NodeShape::Cylinder: return "cylinder";
    case NodeShape::Stadium: return "stadium";
    case NodeShape::Circle: return "circle";
  }
  return "rectangle";
}

std::optional<NodeShape> shape_from_string(std::string_view name) {
  if (name == "rectangle") return NodeShape::Rectangle;
  if (name == "rounded") return NodeShape::Rounded;
  if (name == "cylinder") return NodeShape::Cylinder;
  if (name == "stadium") return NodeShape::Stadium;
  if (name == "circle") return NodeShape::Circle;
  return std::nullopt;
}

const Node* DiagramGraph::find_node(std::string_view id) const {
  for (const Node& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const Edge* DiagramGraph::find_edge(std::string_view id) const {
  for (const Edge& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

const TrustBoundary* DiagramGraph::find_boundary(std::string_view id) const {
  for (const TrustBoundary& b : boundaries)
    if (b.id == id) return &b;
  return nullptr;
}

bool DiagramGraph::boundary_contains(std::string_view boundary_id,
                                     std::string_view node_id) const {
  const Node* n = find_node(node_id);
  if (!n || !n->boundary_id) return false;
  std::string_view cur = *n->boundary_id;
  for (size_t hop = 0; hop <= boundaries.size(); ++hop) {
    if (cur == boundary_id) return true;
    const TrustBoundary* b = find_boundary(cur);
    if (!b || !b->parent_boundary_id) return false;
    cur = *b->parent_boundary_id;
  }
  return false;
}

bool DiagramGraph::has_inbound(std::string_view node_id) const {
  for (const Edge& e : edges)
    if (e.target == node_id) return true;
  return false;
}

bool structurally_equal(const DiagramGraph& a, const DiagramGraph& b) {
  if (a.title != b.title || a.direction != b.direction) return false;
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size() ||
      a.boundaries.size() != b.boundaries.size())
    return false;

  for (const Node& n : a.nodes) {
    const Node* m = b.find_node(n.id);
    if (!m || m->label != n.label || m->shape != n.shape ||
        m->boundary_id != n.boundary_id)
      return false;
  }
  for (size_t i = 0; i < a.edges.size(); ++i) {
    const Edge& x = a.edges[i];
    const Edge& y = b.edges[i];
    if (x.id != y.id || x.source != y.source || x.target != y.target ||
        x.label != y.label)
      return false;
  }
  for (const TrustBoundary& tb : a.boundaries) {
    const TrustBoundary* other = b.find_boundary(tb.id);
    if (!other || other->label != tb.label ||
        other->parent_boundary_id != tb.parent_boundary_id)
      return false;
    std::set<std::string> lhs(tb.member_node_ids.begin(),
                              tb.member_node_ids.end());
    std::set<std::string> rhs(other->member_node_ids.begin(),
                              other->member_node_ids.end());
    if (lhs != rhs) return false;
  }
  return true;
}

SyntaxError::SyntaxError(int line_in, int column_in, std::string expected_in)
    : GraphError("syntax error at line " + std::to_string(line_in) +
                 ", column " + std::to_string(column_in) + ": expected " +
                 expected_in),
      line(line_in),
      column(column_in),
      expected(std::move(expected_in)) {}

DuplicateNodeId::DuplicateNodeId(std::string id_in)
    : GraphError("duplicate identifier '" + id_in + "'"), id(std::move(id_in)) {}

DanglingEdge::DanglingEdge(int edge_ordinal_in, std::string missing_id_in)
    : GraphError("edge e" + std::to_string(edge_ordinal_in) +
                 " references '" + missing_id_in + "', which is not a node"),
      edge_ordinal(edge_ordinal_in),
      missing_id(std::move(missing_id_in)) {}

namespace {
std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const std::string& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}
}  // namespace

OverlappingBoundaries::OverlappingBoundaries(std::vector<std::string> ids_in)
    : GraphError("boundaries overlap: " + join_ids(ids_in)),
      ids(std::move(ids_in)) {}

bool is_valid_identifier(std::string_view id) {
  if (id.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(id[0])) && id[0] != '_')
    return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return id != "end" && id != "subgraph" && id != "flowchart";
}

bool is_valid_label(std::string_view label) {
  if (label.empty()) return false;
  for (char c : label) {
    if (c == '[' || c == ']' || c == '(' || c == ')' || c == '{' || c == '}' ||
        c == '|' || c == '"')
      return false;
    if (static_cast<unsigned char>(c) < 0x20) return false;
  }
  return !std::isspace(static_cast<unsigned char>(label.front())) &&
         !std::isspace(static_cast<unsigned char>(label.back()));
}

void validate(const DiagramGraph& g) {
  std::set<std::string_view> ids;
  for (const Node& n : g.nodes) {
    if (!is_valid_identifier(n.id))
      throw InvalidGraph("invalid node identifier '" + n.id + "'");
    if (!is_valid_label(n.label))
      throw InvalidGraph("invalid label on node '" + n.id + "'");
    if (!ids.insert(n.id).second) throw DuplicateNodeId(n.id);
  }
  for (const TrustBoundary& b : g.boundaries) {
    if (!is_valid_identifier(b.id))
      throw InvalidGraph("invalid boundary identifier '" + b.id + "'");
    if (!is_valid_label(b.label))
      throw InvalidGraph("invalid label on boundary '" + b.id + "'");
    if (!ids.insert(b.id).second) throw DuplicateNodeId(b.id);
    if (b.parent_boundary_id && !g.find_boundary(*b.parent_boundary_id))
      throw InvalidGraph("boundary '" + b.id + "' has unknown parent '" +
                         *b.parent_boundary_id + "'");
  }

  for (size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.id != "e" + std::to_string(i))
      throw InvalidGraph("edge ids must be ordinal; found '" + e.id +
                         "' at position " + std::to_string(i));
    if (!g.find_node(e.source)) throw DanglingEdge(static_cast<int>(i), e.source);
    if (!g.find_node(e.target)) throw DanglingEdge(static_cast<int>(i), e.target);
    if (!e.label.empty() && !is_valid_label(e.label))
      throw InvalidGraph("invalid label on edge '" + e.id + "'");
  }

  // Parent links must form a forest.
  for (const TrustBoundary& b : g.boundaries) {
    std::set<std::string_view> seen;
    const TrustBoundary* cur = &b;
    while (cur->parent_boundary_id) {
      if (!seen.insert(cur->id).second)
        throw OverlappingBoundaries({b.id, std::string(cur->id)});
      cur = g.find_boundary(*cur->parent_boundary_id);
    }
  }

  // Membership lists must agree with the nodes' innermost boundary and no
  // node may be claimed by two boundaries.
  std::map<std::string_view, std::string_view> claimed;
  for (const TrustBoundary& b : g.boundaries) {
    for (const std::string& member : b.member_node_ids) {
      const Node* n = g.find_node(member);
      if (!n)
        throw InvalidGraph("boundary '" + b.id + "' lists unknown node '" +
                           member + "'");
      auto [it, inserted] = claimed.emplace(member, b.id);
      if (!inserted)
        throw OverlappingBoundaries({std::string(it->second), b.id});
      if (!n->boundary_id || *n->boundary_id != b.id)
        throw OverlappingBoundaries({b.id, n->boundary_id.value_or("<none>")});
    }
  }
  for (const Node& n : g.nodes) {
    if (!n.boundary_id) continue;
    const TrustBoundary* b = g.find_boundary(*n.boundary_id);
    if (!b)
      throw InvalidGraph("node '" + n.id + "' names unknown boundary '" +
                         *n.boundary_id + "'");
    if (claimed.find(n.id) == claimed.end())
      throw InvalidGraph("node '" + n.id + "' missing from boundary '" +
                         b->id + "' member list");
  }
}

std::string compute_digest(const DiagramGraph& g) {
  return content_digest(serialize_diagram(g));
}

}  // namespace astride

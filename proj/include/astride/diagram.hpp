#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace astride {

enum class NodeShape { Rectangle, Rounded, Cylinder, Stadium, Circle };
enum class FlowDirection { TopDown, LeftRight };

std::string_view to_string(NodeShape shape);
std::optional<NodeShape> shape_from_string(std::string_view name);

struct Node {
  std::string id;
  std::string label;
  NodeShape shape = NodeShape::Rectangle;
  std::optional<std::string> boundary_id;  // innermost enclosing boundary
};

struct Edge {
  std::string id;  // "e<ordinal>", ordinal fixed by appearance order
  std::string source;
  std::string target;
  std::string label;  // empty when the flow is unlabeled
};

struct TrustBoundary {
  std::string id;
  std::string label;
  std::vector<std::string> member_node_ids;  // direct members only
  std::optional<std::string> parent_boundary_id;
};

struct DiagramGraph {
  std::string title;
  FlowDirection direction = FlowDirection::TopDown;
  std::vector<Node> nodes;       // first-appearance order
  std::vector<Edge> edges;       // appearance order, ids e0, e1, ...
  std::vector<TrustBoundary> boundaries;
  std::string source_digest;     // hash of the canonical serialization

  const Node* find_node(std::string_view id) const;
  const Edge* find_edge(std::string_view id) const;
  const TrustBoundary* find_boundary(std::string_view id) const;

  /// True when node_id lies in boundary_id or a boundary nested below it.
  bool boundary_contains(std::string_view boundary_id,
                         std::string_view node_id) const;
  bool has_inbound(std::string_view node_id) const;
};

// Node and boundary collections compare as sets (canonical serialization
// groups declarations by boundary, so list positions may legally shuffle
// across a round trip); edges compare positionally since the ordinal ids pin
// their order. source_digest is ignored.
bool structurally_equal(const DiagramGraph& a, const DiagramGraph& b);

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : GraphError {
  SyntaxError(int line, int column, std::string expected);
  int line;
  int column;
  std::string expected;
};

struct DuplicateNodeId : GraphError {
  explicit DuplicateNodeId(std::string id);
  std::string id;
};

struct DanglingEdge : GraphError {
  DanglingEdge(int edge_ordinal, std::string missing_id);
  int edge_ordinal;
  std::string missing_id;
};

struct OverlappingBoundaries : GraphError {
  explicit OverlappingBoundaries(std::vector<std::string> ids);
  std::vector<std::string> ids;
};

/// Programmatically built graph violates a constraint that parsing can never
/// produce (bad identifier token, unserializable label, ...).
struct InvalidGraph : GraphError {
  using GraphError::GraphError;
};

/// Checks every graph invariant; throws one of the errors above.
void validate(const DiagramGraph& g);

/// Digest of the canonical serialization.
std::string compute_digest(const DiagramGraph& g);

bool is_valid_identifier(std::string_view id);
bool is_valid_label(std::string_view label);

}  // namespace astride

#include "astride/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "astride/util.hpp"

namespace astride {
namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_label_char(char c) {
  if (c == '[' || c == ']' || c == '(' || c == ')' || c == '{' || c == '}' ||
      c == '|' || c == '"')
    return false;
  return static_cast<unsigned char>(c) >= 0x20;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Single-line scanner with 1-based column reporting.
struct Cursor {
  std::string_view text;
  int line;
  size_t pos = 0;

  int col() const { return static_cast<int>(pos) + 1; }
  bool at_end() const { return pos >= text.size(); }
  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  void skip_ws() {
    while (!at_end() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool consume(std::string_view token) {
    if (text.substr(pos, token.size()) != token) return false;
    pos += token.size();
    return true;
  }

  std::string parse_identifier(const char* expected) {
    if (at_end() || !is_ident_start(peek()))
      throw SyntaxError(line, col(), expected);
    size_t start = pos;
    while (!at_end() && is_ident_char(peek())) ++pos;
    return std::string(text.substr(start, pos - start));
  }

  // Scans label characters until the closing token; rejects characters that
  // would not survive re-serialization.
  std::string parse_label(std::string_view closing) {
    size_t start = pos;
    while (!at_end()) {
      if (text.substr(pos, closing.size()) == closing) {
        std::string label(trim(text.substr(start, pos - start)));
        if (label.empty())
          throw SyntaxError(line, static_cast<int>(start) + 1, "label text");
        pos += closing.size();
        return label;
      }
      if (!is_label_char(peek()))
        throw SyntaxError(line, col(),
                          "label character or '" + std::string(closing) + "'");
      ++pos;
    }
    throw SyntaxError(line, col(), "'" + std::string(closing) + "'");
  }
};

struct ShapeDelims {
  std::string_view open;
  std::string_view close;
  NodeShape shape;
};

// Longest openers first so "[(", "([" and "((" win over "[" and "(".
constexpr ShapeDelims kShapes[] = {
    {"[(", ")]", NodeShape::Cylinder}, {"([", "])", NodeShape::Stadium},
    {"((", "))", NodeShape::Circle},   {"[", "]", NodeShape::Rectangle},
    {"(", ")", NodeShape::Rounded},
};

struct NodeRef {
  std::string id;
  bool declared = false;  // carried a shape/label
  std::string label;
  NodeShape shape = NodeShape::Rectangle;
};

NodeRef parse_node_ref(Cursor& cur) {
  NodeRef ref;
  ref.id = cur.parse_identifier("node identifier");
  for (const ShapeDelims& s : kShapes) {
    size_t before = cur.pos;
    if (cur.consume(s.open)) {
      // "((" backtracks to "(" when the label itself starts a new group;
      // the charset forbids that, so no backtracking is needed.
      ref.declared = true;
      ref.shape = s.shape;
      ref.label = cur.parse_label(s.close);
      (void)before;
      return ref;
    }
  }
  return ref;
}

struct NodeBuild {
  std::string id;
  std::string label;
  NodeShape shape = NodeShape::Rectangle;
  bool declared = false;
  std::optional<size_t> boundary;  // index into boundary list
  std::optional<int> first_edge;   // ordinal of first edge referencing it
};

struct BoundaryBuild {
  std::string id;
  std::string label;
  std::optional<size_t> parent;
};

struct EdgeBuild {
  std::string source;
  std::string target;
  std::string label;
};

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  DiagramGraph run() {
    split_lines();
    for (size_t i = 0; i < lines_.size(); ++i) parse_line(static_cast<int>(i + 1), lines_[i]);
    if (!header_seen_)
      throw SyntaxError(last_line(), 1, "'flowchart TD' or 'flowchart LR'");
    if (!open_.empty())
      throw SyntaxError(last_line(), 1,
                        "'end' closing subgraph '" + boundaries_[open_.back()].id + "'");
    return build();
  }

 private:
  int last_line() const { return static_cast<int>(std::max<size_t>(lines_.size(), 1)); }

  void split_lines() {
    std::string_view rest = source_;
    while (true) {
      size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
    // A trailing newline is a terminator, not an extra line.
    if (lines_.size() > 1 && lines_.back().empty() && source_.back() == '\n')
      lines_.pop_back();
  }

  void parse_line(int line_no, std::string_view raw) {
    std::string_view trimmed = trim(raw);
    if (trimmed.empty()) return;
    if (trimmed.substr(0, 2) == "%%") {
      std::string_view body = trim(trimmed.substr(2));
      if (title_.empty() && body.substr(0, 6) == "title:")
        title_ = std::string(trim(body.substr(6)));
      return;
    }

    Cursor cur{raw, line_no};
    cur.skip_ws();
    if (!header_seen_) {
      parse_header(cur);
      return;
    }

    if (starts_keyword(trimmed, "subgraph")) {
      parse_subgraph(cur);
      return;
    }
    if (trimmed == "end") {
      if (open_.empty())
        throw SyntaxError(line_no, cur.col(), "statement ('end' has no open subgraph)");
      open_.pop_back();
      return;
    }
    parse_statement(cur);
  }

  void parse_header(Cursor& cur) {
    if (!cur.consume("flowchart"))
      throw SyntaxError(cur.line, cur.col(), "'flowchart TD' or 'flowchart LR'");
    cur.skip_ws();
    if (cur.consume("TD"))
      direction_ = FlowDirection::TopDown;
    else if (cur.consume("LR"))
      direction_ = FlowDirection::LeftRight;
    else
      throw SyntaxError(cur.line, cur.col(), "direction 'TD' or 'LR'");
    expect_eol(cur);
    header_seen_ = true;
  }

  static bool starts_keyword(std::string_view trimmed, std::string_view kw) {
    if (trimmed.substr(0, kw.size()) != kw) return false;
    return trimmed.size() == kw.size() || trimmed[kw.size()] == ' ' ||
           trimmed[kw.size()] == '\t';
  }

  void parse_subgraph(Cursor& cur) {
    cur.skip_ws();
    if (!cur.consume("subgraph"))
      throw SyntaxError(cur.line, cur.col(), "'subgraph'");
    cur.skip_ws();
    if (cur.at_end())
      throw SyntaxError(cur.line, cur.col(), "subgraph identifier or title");

    std::string id;
    std::string label;
    size_t args_start = cur.pos;
    bool id_form = false;
    if (is_ident_start(cur.peek())) {
      Cursor probe = cur;
      std::string ident = probe.parse_identifier("subgraph identifier");
      probe.skip_ws();
      if (probe.at_end()) {
        id = ident;
        label = ident;
        cur = probe;
        id_form = true;
      } else if (probe.peek() == '[') {
        probe.pos += 1;
        label = probe.parse_label("]");
        expect_eol(probe);
        id = ident;
        cur = probe;
        id_form = true;
      }
    }
    if (!id_form) {
      // Bare title: synthesize a deterministic id from the appearance order.
      std::string_view rest = trim(cur.text.substr(args_start));
      for (size_t i = 0; i < rest.size(); ++i)
        if (!is_label_char(rest[i]))
          throw SyntaxError(cur.line, static_cast<int>(args_start + i) + 1,
                            "label character");
      label = std::string(rest);
      size_t ordinal = boundaries_.size();
      do {
        id = "b" + std::to_string(ordinal++);
      } while (known_id(id));
      cur.pos = cur.text.size();
    }

    if (known_id(id)) throw DuplicateNodeId(id);
    boundary_index_[id] = boundaries_.size();
    boundaries_.push_back(BoundaryBuild{
        id, label,
        open_.empty() ? std::nullopt : std::make_optional(open_.back())});
    open_.push_back(boundaries_.size() - 1);
  }

  void parse_statement(Cursor& cur) {
    NodeRef first = parse_node_ref(cur);
    touch(first, std::nullopt);
    cur.skip_ws();
    if (cur.at_end()) return;  // plain declaration or bare mention

    if (!cur.consume("-->"))
      throw SyntaxError(cur.line, cur.col(), "'-->' or end of line");
    cur.skip_ws();
    std::string edge_label;
    if (cur.peek() == '|') {
      ++cur.pos;
      edge_label = cur.parse_label("|");
      cur.skip_ws();
    }
    NodeRef second = parse_node_ref(cur);
    int ordinal = static_cast<int>(edges_.size());
    touch(second, ordinal);
    // Source mention may predate this edge but still needs the ordinal for
    // dangling-edge reporting.
    note_edge_use(first.id, ordinal);
    expect_eol(cur);
    edges_.push_back(EdgeBuild{first.id, second.id, edge_label});
  }

  void expect_eol(Cursor& cur) {
    cur.skip_ws();
    if (!cur.at_end())
      throw SyntaxError(cur.line, cur.col(), "end of line");
  }

  bool known_id(const std::string& id) const {
    return node_index_.count(id) || boundary_index_.count(id);
  }

  // Records a node reference; the first appearance fixes list position and
  // boundary membership.
  void touch(const NodeRef& ref, std::optional<int> edge_ordinal) {
    auto it = node_index_.find(ref.id);
    if (it == node_index_.end()) {
      NodeBuild nb;
      nb.id = ref.id;
      nb.declared = ref.declared;
      nb.label = ref.declared ? ref.label : ref.id;
      nb.shape = ref.shape;
      if (!open_.empty()) nb.boundary = open_.back();
      if (edge_ordinal) nb.first_edge = edge_ordinal;
      node_index_[ref.id] = nodes_.size();
      nodes_.push_back(std::move(nb));
      return;
    }
    NodeBuild& nb = nodes_[it->second];
    if (ref.declared) {
      if (nb.declared) throw DuplicateNodeId(ref.id);
      nb.declared = true;
      nb.label = ref.label;
      nb.shape = ref.shape;
    }
    if (edge_ordinal && !nb.first_edge) nb.first_edge = edge_ordinal;
  }

  void note_edge_use(const std::string& id, int ordinal) {
    NodeBuild& nb = nodes_[node_index_.at(id)];
    if (!nb.first_edge) nb.first_edge = ordinal;
  }

  DiagramGraph build() {
    // Undeclared mentions that name a boundary are flows into a subgraph,
    // which this subset does not model as nodes.
    for (const NodeBuild& nb : nodes_) {
      if (nb.declared) {
        if (boundary_index_.count(nb.id)) throw DuplicateNodeId(nb.id);
        continue;
      }
      if (boundary_index_.count(nb.id))
        throw DanglingEdge(nb.first_edge.value_or(0), nb.id);
    }

    DiagramGraph g;
    g.title = title_;
    g.direction = direction_;
    g.nodes.reserve(nodes_.size());
    for (const NodeBuild& nb : nodes_) {
      Node n;
      n.id = nb.id;
      n.label = nb.label;
      n.shape = nb.shape;
      if (nb.boundary) n.boundary_id = boundaries_[*nb.boundary].id;
      g.nodes.push_back(std::move(n));
    }
    g.boundaries.reserve(boundaries_.size());
    for (const BoundaryBuild& bb : boundaries_) {
      TrustBoundary tb;
      tb.id = bb.id;
      tb.label = bb.label;
      if (bb.parent) tb.parent_boundary_id = boundaries_[*bb.parent].id;
      g.boundaries.push_back(std::move(tb));
    }
    for (const NodeBuild& nb : nodes_)
      if (nb.boundary)
        g.boundaries[*nb.boundary].member_node_ids.push_back(nb.id);
    for (size_t i = 0; i < edges_.size(); ++i)
      g.edges.push_back(Edge{"e" + std::to_string(i), edges_[i].source,
                             edges_[i].target, edges_[i].label});

    validate(g);
    g.source_digest = compute_digest(g);
    return g;
  }

  std::string_view source_;
  std::vector<std::string_view> lines_;
  bool header_seen_ = false;
  FlowDirection direction_ = FlowDirection::TopDown;
  std::string title_;
  std::vector<NodeBuild> nodes_;
  std::map<std::string, size_t> node_index_;
  std::vector<BoundaryBuild> boundaries_;
  std::map<std::string, size_t> boundary_index_;
  std::vector<size_t> open_;  // stack of open subgraph indices
  std::vector<EdgeBuild> edges_;
};

void emit_node(std::ostream& out, const Node& n, int depth) {
  static constexpr struct {
    NodeShape shape;
    const char* open;
    const char* close;
  } kDelims[] = {
      {NodeShape::Rectangle, "[", "]"}, {NodeShape::Rounded, "(", ")"},
      {NodeShape::Cylinder, "[(", ")]"}, {NodeShape::Stadium, "([", "])"},
      {NodeShape::Circle, "((", "))"},
  };
  for (const auto& d : kDelims) {
    if (d.shape != n.shape) continue;
    out << std::string(static_cast<size_t>(depth) * 2, ' ') << n.id << d.open
        << n.label << d.close << "\n";
    return;
  }
}

void emit_boundary(std::ostream& out, const DiagramGraph& g,
                   const TrustBoundary& b, int depth) {
  std::string indent(static_cast<size_t>(depth) * 2, ' ');
  out << indent << "subgraph " << b.id << "[" << b.label << "]\n";
  for (const Node& n : g.nodes)
    if (n.boundary_id && *n.boundary_id == b.id) emit_node(out, n, depth + 1);
  for (const TrustBoundary& child : g.boundaries)
    if (child.parent_boundary_id && *child.parent_boundary_id == b.id)
      emit_boundary(out, g, child, depth + 1);
  out << indent << "end\n";
}

}  // namespace

DiagramGraph parse_diagram(std::string_view source) {
  return Parser(source).run();
}

std::string serialize_diagram(const DiagramGraph& g) {
  std::ostringstream out;
  out << "flowchart "
      << (g.direction == FlowDirection::TopDown ? "TD" : "LR") << "\n";
  if (!g.title.empty()) out << "%% title: " << g.title << "\n";
  for (const Node& n : g.nodes)
    if (!n.boundary_id) emit_node(out, n, 1);
  for (const TrustBoundary& b : g.boundaries)
    if (!b.parent_boundary_id) emit_boundary(out, g, b, 1);
  for (const Edge& e : g.edges) {
    out << "  " << e.source << " -->";
    if (!e.label.empty()) out << "|" << e.label << "|";
    out << " " << e.target << "\n";
  }
  return out.str();
}

}  // namespace astride

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "astride/diagram.hpp"
#include "astride/util.hpp"

#ifndef ASTRIDE_FIXTURE_DIR
#define ASTRIDE_FIXTURE_DIR "tests/fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(ASTRIDE_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

/// Runs the built CLI with the given argument string.
inline CliResult run_cli(const std::string& args) {
#ifndef ASTRIDE_CLI_PATH
  throw std::runtime_error("ASTRIDE_CLI_PATH not configured");
#else
  CliResult result;
  std::string cmd = std::string(ASTRIDE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0)
    result.output.append(buf, got);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
#endif
}

// ---------------------------------------------------------------------------
// Seeded generator for syntactically valid but messy diagram text: shuffled
// statements, nested subgraphs, implicit nodes, stray comments, ragged
// indentation.

struct RandomDiagramOptions {
  int max_nodes = 10;
  int max_boundaries = 3;
  double edge_factor = 1.6;  // edges ~ factor * nodes
};

namespace detail {

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words = {
      "Alpha",  "Beta",   "Gamma", "Delta",  "Relay", "Filter",
      "Queue",  "Broker", "Cache", "Router", "Merge", "Sink",
      "Probe",  "Agent",  "Memory", "Tool",  "User",  "Prompt",
      "Model",  "Reasoning", "Gateway", "Ledger"};
  return words;
}

inline std::string random_label(astride::SplitMix64& rng) {
  int words = rng.range(1, 3);
  std::string label;
  for (int w = 0; w < words; ++w) {
    if (w > 0) label += rng.chance(0.1) ? " & " : " ";
    label += rng.pick(word_pool());
  }
  return label;
}

inline std::string indent(astride::SplitMix64& rng) {
  return std::string(static_cast<size_t>(rng.range(0, 4)), ' ');
}

}  // namespace detail

inline std::string random_diagram_text(uint64_t seed,
                                       const RandomDiagramOptions& opts = {}) {
  astride::SplitMix64 rng(seed);

  const int n = rng.range(1, opts.max_nodes);
  const int nb = rng.range(0, opts.max_boundaries);
  const int slots = nb + 1;  // slot 0 is top level, slot k is boundary k-1

  struct Stmt {
    std::string text;
  };
  std::vector<std::vector<std::string>> slot_stmts(static_cast<size_t>(slots));
  std::vector<int> boundary_parent(static_cast<size_t>(nb), 0);
  for (int b = 1; b < nb; ++b)
    boundary_parent[static_cast<size_t>(b)] = rng.range(0, b);  // 0 = top

  static const char* kOpen[] = {"[", "(", "[(", "([", "(("};
  static const char* kClose[] = {"]", ")", ")]", "])", "))"};

  std::vector<std::string> edge_targets;
  for (int i = 0; i < n; ++i) {
    std::string id = "n" + std::to_string(i);
    edge_targets.push_back(id);
    if (rng.chance(0.78)) {
      int shape = rng.range(0, 4);
      slot_stmts[static_cast<size_t>(rng.range(0, slots - 1))].push_back(
          id + kOpen[shape] + detail::random_label(rng) + kClose[shape]);
    }
  }
  // A handful of ids that only ever appear as edge endpoints.
  for (int i = 0; i < 3; ++i)
    if (rng.chance(0.3)) edge_targets.push_back("m" + std::to_string(i));

  const int edges =
      rng.range(0, static_cast<int>(opts.edge_factor * n) + 1);
  for (int e = 0; e < edges; ++e) {
    std::string stmt = rng.pick(edge_targets);
    stmt += rng.chance(0.5) ? " --> " : "-->";
    if (rng.chance(0.3)) stmt += "|" + detail::random_label(rng) + "| ";
    stmt += rng.pick(edge_targets);
    slot_stmts[static_cast<size_t>(rng.range(0, slots - 1))].push_back(stmt);
  }

  // Children lists for boundary nesting (slot index space).
  std::vector<std::vector<int>> children(static_cast<size_t>(slots));
  for (int b = 0; b < nb; ++b)
    children[static_cast<size_t>(boundary_parent[static_cast<size_t>(b)])]
        .push_back(b + 1);

  std::ostringstream out;
  out << (rng.chance(0.8) ? "flowchart TD" : "flowchart LR") << "\n";
  if (rng.chance(0.4)) out << "%% title: " << detail::random_label(rng) << "\n";

  // Statements and child blocks interleave in random order per slot.
  auto emit_slot = [&](auto&& self, int slot) -> void {
    std::vector<int> items;  // >=0 statement index, <0 child slot ~(k)
    for (size_t s = 0; s < slot_stmts[static_cast<size_t>(slot)].size(); ++s)
      items.push_back(static_cast<int>(s));
    for (int child : children[static_cast<size_t>(slot)])
      items.push_back(~child);
    for (size_t i = items.size(); i > 1; --i)
      std::swap(items[i - 1], items[static_cast<size_t>(rng.below(i))]);

    for (int item : items) {
      if (rng.chance(0.1)) out << "\n";
      if (rng.chance(0.12)) out << detail::indent(rng) << "%% " \
          << detail::random_label(rng) << "\n";
      if (item >= 0) {
        out << detail::indent(rng)
            << slot_stmts[static_cast<size_t>(slot)][static_cast<size_t>(item)]
            << "\n";
      } else {
        int child = ~item;
        out << detail::indent(rng) << "subgraph z" << (child - 1);
        if (rng.chance(0.7)) out << "[" << detail::random_label(rng) << "]";
        out << "\n";
        self(self, child);
        out << detail::indent(rng) << "end\n";
      }
    }
  };
  emit_slot(emit_slot, 0);
  return out.str();
}

// ---------------------------------------------------------------------------
// Oracles, written against the raw text / raw graph rather than the parser
// internals.

/// Innermost enclosing subgraph per node id, keyed off the first appearance
/// in the token stream; "" means top level.
inline std::map<std::string, std::string> boundary_membership_oracle(
    const std::string& text) {
  std::map<std::string, std::string> membership;
  std::vector<std::string> stack;

  auto record = [&](const std::string& id) {
    if (id.empty() || membership.count(id)) return;
    membership[id] = stack.empty() ? "" : stack.back();
  };
  auto leading_ident = [](const std::string& s) {
    size_t i = 0;
    while (i < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    return s.substr(0, i);
  };

  std::istringstream lines(text);
  std::string raw;
  bool first = true;
  while (std::getline(lines, raw)) {
    std::string line = raw;
    size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    line = line.substr(begin);
    if (line.rfind("%%", 0) == 0) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.rfind("subgraph", 0) == 0) {
      std::string rest = line.substr(8);
      size_t s = rest.find_first_not_of(" \t");
      stack.push_back(leading_ident(rest.substr(s == std::string::npos ? 0 : s)));
      continue;
    }
    if (line == "end" || line.rfind("end ", 0) == 0) {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    std::string lhs = leading_ident(line);
    record(lhs);
    size_t arrow = line.find("-->");
    if (arrow != std::string::npos) {
      std::string rest = line.substr(arrow + 3);
      size_t pipe = rest.find('|');
      if (pipe != std::string::npos) {
        size_t close = rest.find('|', pipe + 1);
        if (close != std::string::npos) rest = rest.substr(close + 1);
      }
      size_t s = rest.find_first_not_of(" \t");
      if (s != std::string::npos) record(leading_ident(rest.substr(s)));
    }
  }
  return membership;
}

/// Brute-force taint oracle: a node is tainted iff a simple path from some
/// origin reaches it, found by exhaustive DFS over simple paths.
inline std::set<std::string> taint_oracle(const astride::DiagramGraph& g,
                                          const std::set<std::string>& origins) {
  std::set<std::string> tainted;
  std::vector<std::string> path;
  std::set<std::string> on_path;

  auto dfs = [&](auto&& self, const std::string& at) -> void {
    tainted.insert(at);
    for (const astride::Edge& e : g.edges) {
      if (e.source != at || on_path.count(e.target)) continue;
      on_path.insert(e.target);
      self(self, e.target);
      on_path.erase(e.target);
    }
  };
  for (const std::string& origin : origins) {
    on_path.insert(origin);
    dfs(dfs, origin);
    on_path.erase(origin);
  }
  return tainted;
}

}  // namespace testutil

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relipop/graph.hpp"

namespace relipop {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct ParseOptions {
  bool allow_boundary = false;  // admit failure probabilities of exactly 0 or 1
};

using ParsedGraph = std::variant<UndirectedGraph, DirectedMultigraph>;

namespace detail {

struct Token {
  std::string_view text;
  int line;
  int column;
};

// Splits the input into whitespace-separated tokens, dropping '#' comments.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1, column = 1;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      ++line;
      column = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++column;
      ++i;
      continue;
    }
    size_t start = i;
    int start_col = column;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' &&
           text[i] != '\n' && text[i] != '#') {
      ++i;
      ++column;
    }
    tokens.push_back({text.substr(start, i - start), line, start_col});
  }
  return tokens;
}

inline int parse_int(const Token& t, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    throw ParseError(std::string("expected ") + what + ", got '" + std::string(t.text) + "'",
                     t.line, t.column);
  return value;
}

inline double parse_prob(const Token& t, const ParseOptions& opts) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    throw ParseError("expected a probability, got '" + std::string(t.text) + "'", t.line,
                     t.column);
  if (opts.allow_boundary) {
    if (!(value >= 0.0 && value <= 1.0))
      throw ParseError("probability " + std::string(t.text) + " outside [0, 1]", t.line,
                       t.column);
  } else {
    if (!(value > 0.0 && value < 1.0))
      throw ParseError("probability " + std::string(t.text) +
                           " outside (0, 1); pass allow_boundary to admit 0 and 1",
                       t.line, t.column);
  }
  return value;
}

inline void check_vertex(int v, int n, const Token& t) {
  if (v < 0 || v >= n)
    throw ParseError("vertex id " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")",
                     t.line, t.column);
}

}  // namespace detail

// Text format, '#' starts a comment anywhere:
//   undirected <n> <m>          followed by m lines  e <u> <v> <p>
//   digraph <n> <m> root=<r>    followed by m lines  a <tail> <head> <p>
// Vertices are 0-based.  <p> is the failure probability of the edge/arc.
inline ParsedGraph parse_graph(std::string_view text, ParseOptions opts = {}) {
  auto tokens = detail::tokenize(text);
  size_t pos = 0;
  auto need = [&](const char* what) -> const detail::Token& {
    if (pos >= tokens.size()) {
      int line = tokens.empty() ? 1 : tokens.back().line;
      int col = tokens.empty() ? 1 : tokens.back().column + static_cast<int>(tokens.back().text.size());
      throw ParseError(std::string("unexpected end of input, expected ") + what, line, col);
    }
    return tokens[pos++];
  };

  const detail::Token& kind = need("'undirected' or 'digraph'");
  if (kind.text == "undirected") {
    int n = detail::parse_int(need("vertex count"), "vertex count");
    int m = detail::parse_int(need("edge count"), "edge count");
    if (n <= 0) throw ParseError("vertex count must be positive", kind.line, kind.column);
    if (m < 0) throw ParseError("edge count must be non-negative", kind.line, kind.column);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (int i = 0; i < m; ++i) {
      const detail::Token& tag = need("'e' record");
      if (tag.text != "e")
        throw ParseError("expected 'e', got '" + std::string(tag.text) + "'", tag.line, tag.column);
      const detail::Token& tu = need("vertex id");
      const detail::Token& tv = need("vertex id");
      const detail::Token& tp = need("probability");
      int u = detail::parse_int(tu, "vertex id");
      int v = detail::parse_int(tv, "vertex id");
      detail::check_vertex(u, n, tu);
      detail::check_vertex(v, n, tv);
      if (u == v) throw ParseError("self-loop on vertex " + std::to_string(u), tu.line, tu.column);
      edges.push_back({u, v, detail::parse_prob(tp, opts)});
    }
    if (pos != tokens.size())
      throw ParseError("trailing content after the declared edge records", tokens[pos].line,
                       tokens[pos].column);
    return UndirectedGraph(n, std::move(edges));
  }
  if (kind.text == "digraph") {
    int n = detail::parse_int(need("vertex count"), "vertex count");
    int m = detail::parse_int(need("arc count"), "arc count");
    const detail::Token& rt = need("root=<r>");
    if (rt.text.substr(0, 5) != "root=")
      throw ParseError("expected root=<r>, got '" + std::string(rt.text) + "'", rt.line,
                       rt.column);
    detail::Token rnum{rt.text.substr(5), rt.line, rt.column + 5};
    int root = detail::parse_int(rnum, "root vertex");
    if (n <= 0) throw ParseError("vertex count must be positive", kind.line, kind.column);
    if (m < 0) throw ParseError("arc count must be non-negative", kind.line, kind.column);
    detail::check_vertex(root, n, rnum);
    std::vector<Arc> arcs;
    arcs.reserve(m);
    for (int i = 0; i < m; ++i) {
      const detail::Token& tag = need("'a' record");
      if (tag.text != "a")
        throw ParseError("expected 'a', got '" + std::string(tag.text) + "'", tag.line, tag.column);
      const detail::Token& tt = need("tail vertex");
      const detail::Token& th = need("head vertex");
      const detail::Token& tp = need("probability");
      int tail = detail::parse_int(tt, "tail vertex");
      int head = detail::parse_int(th, "head vertex");
      detail::check_vertex(tail, n, tt);
      detail::check_vertex(head, n, th);
      if (tail == head)
        throw ParseError("self-loop on vertex " + std::to_string(tail), tt.line, tt.column);
      arcs.push_back({tail, head, detail::parse_prob(tp, opts)});
    }
    if (pos != tokens.size())
      throw ParseError("trailing content after the declared arc records", tokens[pos].line,
                       tokens[pos].column);
    auto twin = find_twin_pairing(arcs);
    if (twin) return DirectedMultigraph(n, root, std::move(arcs), std::move(*twin));
    return DirectedMultigraph(n, root, std::move(arcs));
  }
  throw ParseError("expected 'undirected' or 'digraph', got '" + std::string(kind.text) + "'",
                   kind.line, kind.column);
}

inline ParsedGraph parse_graph_file(const std::string& path, ParseOptions opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str(), opts);
}

}  // namespace relipop

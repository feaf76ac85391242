#include "aivgt/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "aivgt/errors.hpp"

namespace aivgt {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Edge token: [left][-][right], left in {-,<,o}, right in {-,>,o}.
bool decode_edge(const std::string& tok, Mark& at_left, Mark& at_right) {
  if (tok.size() != 3 || tok[1] != '-') return false;
  switch (tok[0]) {
    case '-': at_left = Mark::Tail; break;
    case '<': at_left = Mark::Arrow; break;
    case 'o': at_left = Mark::Circle; break;
    default: return false;
  }
  switch (tok[2]) {
    case '-': at_right = Mark::Tail; break;
    case '>': at_right = Mark::Arrow; break;
    case 'o': at_right = Mark::Circle; break;
    default: return false;
  }
  return true;
}

char left_char(Mark m) {
  switch (m) {
    case Mark::Tail: return '-';
    case Mark::Arrow: return '<';
    case Mark::Circle: return 'o';
  }
  return '?';
}

char right_char(Mark m) {
  switch (m) {
    case Mark::Tail: return '-';
    case Mark::Arrow: return '>';
    case Mark::Circle: return 'o';
  }
  return '?';
}

}  // namespace

ParsedGraph parse_graph(const std::string& text) {
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;

  std::optional<std::string> kind;
  std::optional<Dag> dag;
  std::optional<MixedGraph> mixed;

  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = trim(line);
    if (line.empty()) continue;

    auto toks = split_ws(line);
    if (!kind) {
      if (toks.size() != 2 || toks[0] != "graph")
        throw parse_error("expected header 'graph dag|mag|pag'", lineno);
      kind = toks[1];
      if (*kind == "dag")
        dag.emplace();
      else if (*kind == "mag")
        mixed.emplace(GraphKind::Mag);
      else if (*kind == "pag")
        mixed.emplace(GraphKind::Pag);
      else
        throw parse_error("unknown graph kind '" + toks[1] + "'", lineno);
      continue;
    }

    if (toks[0] == "node") {
      if (toks.size() < 2 || toks.size() > 3)
        throw parse_error("expected 'node NAME [latent]'", lineno);
      bool latent = false;
      if (toks.size() == 3) {
        if (toks[2] != "latent") throw parse_error("unknown node flag '" + toks[2] + "'", lineno);
        latent = true;
      }
      try {
        if (dag)
          dag->add_node(toks[1], !latent);
        else {
          if (latent) throw parse_error("latent nodes are only valid in DAGs", lineno);
          mixed->add_node(toks[1]);
        }
      } catch (const input_error& e) {
        throw parse_error(e.what(), lineno);
      }
      continue;
    }

    if (toks.size() != 3) throw parse_error("expected 'A <edge> B'", lineno);
    Mark at_left, at_right;
    if (!decode_edge(toks[1], at_left, at_right))
      throw parse_error("bad edge token '" + toks[1] + "'", lineno);
    try {
      if (dag) {
        if (at_left != Mark::Tail || at_right != Mark::Arrow)
          throw parse_error("DAG edges must be of the form 'A --> B'", lineno);
        dag->add_edge(dag->require(toks[0]), dag->require(toks[2]));
      } else {
        int a = mixed->require(toks[0]);
        int b = mixed->require(toks[2]);
        if (mixed->adjacent(a, b)) throw parse_error("duplicate edge", lineno);
        if (mixed->kind() == GraphKind::Mag && (at_left == Mark::Circle || at_right == Mark::Circle))
          throw parse_error("MAG edges may not carry circle marks", lineno);
        mixed->set_edge(a, b, at_left, at_right);
      }
    } catch (const parse_error&) {
      throw;
    } catch (const input_error& e) {
      throw parse_error(e.what(), lineno);
    }
  }

  if (!kind) throw parse_error("empty graph text", 1);
  if (dag) return *dag;
  if (mixed->kind() == GraphKind::Mag) mixed->validate_mag();
  return *mixed;
}

std::string serialize_graph(const Dag& g) {
  std::ostringstream os;
  os << "graph dag\n";
  for (int v = 0; v < g.node_count(); ++v) {
    os << "node " << g.name(v);
    if (!g.observed(v)) os << " latent";
    os << "\n";
  }
  for (int v = 0; v < g.node_count(); ++v)
    for (int c : g.children(v)) os << g.name(v) << " --> " << g.name(c) << "\n";
  return os.str();
}

std::string serialize_graph(const MixedGraph& g) {
  std::ostringstream os;
  os << "graph " << (g.kind() == GraphKind::Mag ? "mag" : "pag") << "\n";
  for (int v = 0; v < g.node_count(); ++v) os << "node " << g.name(v) << "\n";
  for (const auto& [a, b, at_a, at_b] : g.edges())
    os << g.name(a) << " " << left_char(at_a) << '-' << right_char(at_b) << " " << g.name(b)
       << "\n";
  return os.str();
}

std::string serialize_graph(const ParsedGraph& g) {
  if (std::holds_alternative<Dag>(g)) return serialize_graph(std::get<Dag>(g));
  return serialize_graph(std::get<MixedGraph>(g));
}

ParsedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

void write_graph_file(const std::string& path, const ParsedGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write graph file: " + path);
  out << serialize_graph(g);
}

}  // namespace aivgt

#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "aivgt/graph.hpp"

namespace aivgt {

using ParsedGraph = std::variant<Dag, MixedGraph>;

/// Parses the graph text format:
///   graph dag|mag|pag
///   node NAME [latent]
///   A --> B | A <-> B | A o-> B | A o-o B  (any tail/arrow/circle combo)
/// '#' starts a comment; blank lines are ignored. Throws parse_error with
/// the offending line number.
ParsedGraph parse_graph(const std::string& text);

std::string serialize_graph(const Dag& g);
std::string serialize_graph(const MixedGraph& g);
std::string serialize_graph(const ParsedGraph& g);

ParsedGraph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const ParsedGraph& g);

}  // namespace aivgt

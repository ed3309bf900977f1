#pragma once

#include "slotgraph/corpus.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotgraph::depgraph {

/// One head index per word: 0 means syntactic root, otherwise the 1-based
/// index of the head word.
struct DepParse {
  std::vector<int> heads;
  int n_words() const { return static_cast<int>(heads.size()); }
};

/// Boolean neighbor structure over (N_w+2) nodes: index 0 is the
/// sentence-start placeholder, 1..N_w the words, N_w+1 the end placeholder.
struct AdjacencyMatrix {
  Eigen::MatrixXd a;  // entries 0/1
  long size() const { return a.rows(); }
};

struct DepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DepLengthMismatch : DepError {
  int line;
  explicit DepLengthMismatch(int ln)
      : DepError("parse length mismatch at line " + std::to_string(ln)),
        line(ln) {}
};
struct MultipleRoots : DepError {
  int line;
  explicit MultipleRoots(int ln)
      : DepError("parse must have exactly one root (line " +
                 std::to_string(ln) + ")"),
        line(ln) {}
};
struct CyclicHead : DepError {
  int line;
  explicit CyclicHead(int ln)
      : DepError("self-referential head at line " + std::to_string(ln)),
        line(ln) {}
};

/// Validates DepParse invariants; `line` is used for error reporting only.
void validate_parse(const DepParse& parse, int line = 0);

/// Reads a .dep file, one line of space-separated head indices per dataset
/// sample, validating alignment and tree invariants.
std::vector<DepParse> load_parses(const std::filesystem::path& path,
                                  const corpus::Dataset& dataset);

/// Edges: self-loop on every node, symmetric word↔head edges, and symmetric
/// edges from both placeholders to the root word.
AdjacencyMatrix build_adjacency(const DepParse& parse);

struct MalformedConllu : DepError {
  int line;
  explicit MalformedConllu(int ln)
      : DepError("malformed CoNLL-U at line " + std::to_string(ln)), line(ln) {}
};

/// Extracts the HEAD column from CoNLL-U into .dep lines (one per sentence).
/// Multiword-token ranges and comments are skipped; empty sentence blocks
/// are dropped.
std::vector<std::string> conllu_to_dep_lines(const std::filesystem::path& in);

}  // namespace slotgraph::depgraph

#include "slotgraph/depgraph.hpp"

#include <fstream>
#include <sstream>

namespace slotgraph::depgraph {

void validate_parse(const DepParse& parse, int line) {
  int n = parse.n_words();
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    int h = parse.heads[i];
    if (h == i + 1) throw CyclicHead(line);
    if (h < 0 || h > n) throw DepError("head index out of range at line " +
                                       std::to_string(line));
    if (h == 0) ++roots;
  }
  if (roots != 1) throw MultipleRoots(line);
}

std::vector<DepParse> load_parses(const std::filesystem::path& path,
                                  const corpus::Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw DepError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() != dataset.samples.size()) {
    throw DepError("parse file " + path.string() + " has " +
                   std::to_string(lines.size()) + " lines for " +
                   std::to_string(dataset.samples.size()) + " samples");
  }

  std::vector<DepParse> parses;
  parses.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int line_no = static_cast<int>(i) + 1;
    DepParse p;
    std::istringstream ss(lines[i]);
    int h;
    while (ss >> h) p.heads.push_back(h);
    if (p.n_words() !=
        static_cast<int>(dataset.samples[i].utterance.tokens.size())) {
      throw DepLengthMismatch(line_no);
    }
    validate_parse(p, line_no);
    parses.push_back(std::move(p));
  }
  return parses;
}

AdjacencyMatrix build_adjacency(const DepParse& parse) {
  int n = parse.n_words();
  long side = n + 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(side, side);
  auto connect = [&](long i, long j) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  };
  for (int w = 0; w < n; ++w) {
    int h = parse.heads[w];
    long node = w + 1;
    if (h == 0) {
      connect(0, node);         // start placeholder ↔ root
      connect(n + 1, node);     // end placeholder ↔ root
    } else {
      connect(node, h);
    }
  }
  return AdjacencyMatrix{std::move(a)};
}

std::vector<std::string> conllu_to_dep_lines(const std::filesystem::path& in) {
  std::ifstream f(in);
  if (!f) throw DepError("cannot open " + in.string());
  std::vector<std::string> out;
  std::vector<int> heads;
  std::string line;
  int line_no = 0;
  auto flush = [&]() {
    if (heads.empty()) return;
    std::ostringstream ss;
    for (std::size_t i = 0; i < heads.size(); ++i) {
      if (i) ss << ' ';
      ss << heads[i];
    }
    out.push_back(ss.str());
    heads.clear();
  };
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> cols;
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 7) throw MalformedConllu(line_no);
    const std::string& id = cols[0];
    // multiword token ranges (e.g. 3-4) and empty nodes (e.g. 5.1) carry no head
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      continue;
    }
    try {
      heads.push_back(std::stoi(cols[6]));
    } catch (const std::exception&) {
      throw MalformedConllu(line_no);
    }
  }
  flush();
  return out;
}

}  // namespace slotgraph::depgraph

#include "pif/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "pif/errors.hpp"

namespace pif {

namespace {

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

long parse_long(const std::string& tok, const std::string& path, long line_no) {
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(path, line_no, "expected integer, got '" + tok + "'");
  }
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SparseAdjacency load_edgelist(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  long line_no = 0;
  std::optional<int> declared_n;
  int max_index = -1;
  std::vector<SparseAdjacency::Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    if (line.rfind("n=", 0) == 0) {
      declared_n = static_cast<int>(parse_long(line.substr(2), path, line_no));
      continue;
    }
    auto toks = split_ws(line);
    if (toks.size() != 2) {
      throw ParseError(path, line_no, "expected 'i<TAB>j'");
    }
    long i = parse_long(toks[0], path, line_no);
    long j = parse_long(toks[1], path, line_no);
    if (i < 0 || j < 0) throw ParseError(path, line_no, "negative node index");
    if (i == j) throw ParseError(path, line_no, "self-loop at node " + toks[0]);
    max_index = std::max(max_index, static_cast<int>(std::max(i, j)));
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  int n = declared_n.value_or(max_index + 1);
  if (n <= 0) throw DataError(path + ": empty edgelist without an n= header");
  if (max_index >= n) {
    throw DataError(path + ": node index " + std::to_string(max_index) +
                    " exceeds declared n=" + std::to_string(n));
  }
  return SparseAdjacency(n, std::move(edges));
}

void save_edgelist(const SparseAdjacency& adj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "n=" << adj.n_persons() << "\n";
  for (const auto& [i, j] : adj.edges()) out << i << "\t" << j << "\n";
  if (!out) throw DataError("write failed: " + path);
}

CountMatrix load_counts(const std::string& path, int n_rows, int n_cols) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  long line_no = 0;
  std::vector<CountEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    if (line.rfind("shape=", 0) == 0) {
      auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw ParseError(path, line_no, "malformed shape header");
      }
      int r = static_cast<int>(parse_long(line.substr(6, comma - 6), path, line_no));
      int c = static_cast<int>(parse_long(line.substr(comma + 1), path, line_no));
      if ((n_rows != 0 && n_rows != r) || (n_cols != 0 && n_cols != c)) {
        throw DataError(path + ": shape header " + std::to_string(r) + "," +
                        std::to_string(c) + " does not match expected " +
                        std::to_string(n_rows) + "," + std::to_string(n_cols));
      }
      n_rows = r;
      n_cols = c;
      continue;
    }
    auto toks = split_ws(line);
    if (toks.size() != 3) {
      throw ParseError(path, line_no, "expected 'row<TAB>col<TAB>count'");
    }
    long r = parse_long(toks[0], path, line_no);
    long c = parse_long(toks[1], path, line_no);
    long v = parse_long(toks[2], path, line_no);
    if (v < 0) throw ParseError(path, line_no, "negative count");
    entries.push_back({static_cast<int>(r), static_cast<int>(c), v});
  }
  if (n_rows == 0 || n_cols == 0) {
    throw DataError(path + ": no shape header and no dimensions supplied");
  }
  return CountMatrix(n_rows, n_cols, std::move(entries));
}

void save_counts(const CountMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "shape=" << m.n_rows() << "," << m.n_cols() << "\n";
  for (const auto& e : m.entries()) {
    out << e.row << "\t" << e.col << "\t" << e.count << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

Grid load_grid(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  long line_no = 0;
  Grid g;
  bool have_shape = false;
  Eigen::Index next_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    if (line.rfind("shape=", 0) == 0) {
      auto comma = line.find(',');
      long r = parse_long(line.substr(6, comma - 6), path, line_no);
      long c = parse_long(line.substr(comma + 1), path, line_no);
      g.resize(r, c);
      have_shape = true;
      continue;
    }
    if (!have_shape) throw ParseError(path, line_no, "missing shape header");
    auto toks = split_ws(line);
    if (static_cast<Eigen::Index>(toks.size()) != g.cols()) {
      throw ParseError(path, line_no, "wrong number of columns");
    }
    if (next_row >= g.rows()) throw ParseError(path, line_no, "too many rows");
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      g(next_row, c) = std::strtod(toks[c].c_str(), nullptr);
    }
    ++next_row;
  }
  if (!have_shape) throw DataError(path + ": missing shape header");
  if (next_row != g.rows()) throw DataError(path + ": fewer rows than declared");
  return g;
}

void save_grid(const Grid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "shape=" << g.rows() << "," << g.cols() << "\n";
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      if (c) out << "\t";
      out << format_double(g(r, c));
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace pif

#include "eqloop/loop_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace eqloop {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string expect_key(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_loop: missing '" + key + "' line");
  std::istringstream ls(line);
  std::string k, v;
  ls >> k >> v;
  if (k != key) throw std::runtime_error("read_loop: expected '" + key + "', found '" + k + "'");
  return v;
}

}  // namespace

void write_loop(std::ostream& os, const LoopRecord& r) {
  os << "# eqloop-loop v1\n";
  os << "manifold " << r.manifold << "\n";
  os << "n " << r.loop.size() << "\n";
  os << "seed " << r.seed << "\n";
  for (const auto& p : r.loop.points) {
    for (int i = 0; i < p.size(); ++i) os << (i ? " " : "") << format_double(p[i]);
    os << "\n";
  }
}

LoopRecord read_loop(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# eqloop-loop v1") throw std::runtime_error("read_loop: bad header");
  LoopRecord r;
  r.manifold = expect_key(is, "manifold");
  const long n = std::stol(expect_key(is, "n"));
  r.seed = std::stoull(expect_key(is, "seed"));
  const int dim = r.manifold == "s2" ? 3 : 4;
  for (long j = 0; j < n; ++j) {
    if (!std::getline(is, line)) throw std::runtime_error("read_loop: truncated data");
    std::istringstream ls(line);
    Ambient p(dim);
    for (int i = 0; i < dim; ++i)
      if (!(ls >> p[i])) throw std::runtime_error("read_loop: malformed row");
    r.loop.points.push_back(p);
  }
  return r;
}

}  // namespace eqloop

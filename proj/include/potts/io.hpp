#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include "potts/instance.hpp"
#include "potts/qubo.hpp"

namespace potts {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that parses back to the identical double.
inline std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw io_error("double formatting failed");
  return std::string(buf, p);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
inline T parse_number(std::string_view tok, const char* what, int lineno) {
  T value{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw io_error("line " + std::to_string(lineno) + ": bad " + what + " '" +
                   std::string(tok) + "'");
  return value;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  // next non-empty line; false at end of input
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!detail::split_ws(line).empty()) return true;
    }
    return false;
  }
  std::string must(const char* what) {
    std::string line;
    if (!next(line)) throw io_error("unexpected end of input, expected " + std::string(what));
    return line;
  }
  int lineno() const { return lineno_; }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

inline std::pair<std::string, std::string> keyed_line(LineReader& r, const char* key) {
  std::string line = r.must(key);
  auto toks = split_ws(line);
  if (toks.empty() || toks[0] != key)
    throw io_error("line " + std::to_string(r.lineno()) + ": expected '" + key + "'");
  std::string rest;
  for (std::size_t k = 1; k < toks.size(); ++k) {
    if (k > 1) rest += ' ';
    rest += std::string(toks[k]);
  }
  return {std::string(toks[0]), rest};
}

inline long keyed_count(LineReader& r, const char* key) {
  auto [k, rest] = keyed_line(r, key);
  return parse_number<long>(rest, key, r.lineno());
}

}  // namespace detail

inline void write_instance(std::ostream& out, const PottsInstance& inst) {
  out << "potts-instance v1\n";
  out << "num_vars " << inst.num_vars << "\n";
  out << "q " << inst.q << "\n";
  out << "edges " << inst.edges.size() << "\n";
  for (const Edge& e : inst.edges)
    out << e.i << " " << e.j << " " << format_double(e.coupling) << " " << e.shift << "\n";
  out << "metadata " << inst.metadata.size() << "\n";
  for (const auto& [k, v] : inst.metadata) out << k << " " << v << "\n";
}

inline PottsInstance read_instance(std::istream& in) {
  detail::LineReader r(in);
  std::string header = r.must("header");
  if (detail::split_ws(header) != std::vector<std::string_view>{"potts-instance", "v1"})
    throw io_error("not a potts-instance v1 file");
  PottsInstance inst;
  inst.num_vars = static_cast<int>(detail::keyed_count(r, "num_vars"));
  inst.q = static_cast<int>(detail::keyed_count(r, "q"));
  long edges = detail::keyed_count(r, "edges");
  if (edges < 0) throw io_error("negative edge count");
  std::unordered_set<std::uint64_t> seen;
  for (long k = 0; k < edges; ++k) {
    std::string line = r.must("edge line");
    auto toks = detail::split_ws(line);
    if (toks.size() != 4)
      throw io_error("line " + std::to_string(r.lineno()) + ": edge needs 'i j coupling shift'");
    Edge e;
    e.i = detail::parse_number<int>(toks[0], "edge endpoint", r.lineno());
    e.j = detail::parse_number<int>(toks[1], "edge endpoint", r.lineno());
    e.coupling = detail::parse_number<double>(toks[2], "coupling", r.lineno());
    e.shift = detail::parse_number<int>(toks[3], "shift", r.lineno());
    if (!seen.insert(Qubo::pack(e.i, e.j)).second)
      throw io_error("line " + std::to_string(r.lineno()) + ": duplicate edge");
    inst.edges.push_back(e);
  }
  long meta = detail::keyed_count(r, "metadata");
  for (long k = 0; k < meta; ++k) {
    std::string line = r.must("metadata line");
    auto toks = detail::split_ws(line);
    std::string key(toks[0]);
    std::string value;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      if (t > 1) value += ' ';
      value += std::string(toks[t]);
    }
    inst.metadata.emplace_back(key, value);
  }
  try {
    validate_instance(inst);
  } catch (const std::invalid_argument& e) {
    throw io_error(std::string("invalid instance: ") + e.what());
  }
  return inst;
}

inline void write_assignment(std::ostream& out, const Assignment& a) {
  for (int c : a) out << c << "\n";
}

inline Assignment read_assignment(std::istream& in, const PottsInstance& inst) {
  detail::LineReader r(in);
  Assignment a;
  std::string line;
  while (r.next(line)) {
    auto toks = detail::split_ws(line);
    for (auto t : toks) a.push_back(detail::parse_number<int>(t, "component", r.lineno()));
  }
  try {
    check_assignment(inst, a);
  } catch (const std::invalid_argument& e) {
    throw io_error(std::string("invalid assignment: ") + e.what());
  }
  return a;
}

// Text QUBO: "i j coeff" per term, i == j meaning a linear term.
inline void write_qubo(std::ostream& out, const Qubo& q) {
  out << "num_bits " << q.num_bits << "\n";
  out << "offset " << format_double(q.offset) << "\n";
  for (int i = 0; i < q.num_bits; ++i)
    if (q.linear[static_cast<std::size_t>(i)] != 0.0)
      out << i << " " << i << " " << format_double(q.linear[static_cast<std::size_t>(i)]) << "\n";
  std::vector<std::uint64_t> keys;
  keys.reserve(q.quadratic.size());
  for (const auto& [key, c] : q.quadratic)
    if (c != 0.0) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t key : keys) {
    auto [i, j] = Qubo::unpack(key);
    out << i << " " << j << " " << format_double(q.quadratic.at(key)) << "\n";
  }
}

inline Qubo read_qubo(std::istream& in) {
  detail::LineReader r(in);
  long n = detail::keyed_count(r, "num_bits");
  if (n < 0) throw io_error("negative num_bits");
  auto [key, rest] = detail::keyed_line(r, "offset");
  Qubo q(static_cast<int>(n));
  q.offset = detail::parse_number<double>(rest, "offset", r.lineno());
  std::string line;
  while (r.next(line)) {
    auto toks = detail::split_ws(line);
    if (toks.size() != 3)
      throw io_error("line " + std::to_string(r.lineno()) + ": term needs 'i j coeff'");
    int i = detail::parse_number<int>(toks[0], "bit index", r.lineno());
    int j = detail::parse_number<int>(toks[1], "bit index", r.lineno());
    double c = detail::parse_number<double>(toks[2], "coefficient", r.lineno());
    try {
      if (i == j)
        q.add_linear(i, c);
      else
        q.add_quadratic(i, j, c);
    } catch (const std::invalid_argument& e) {
      throw io_error("line " + std::to_string(r.lineno()) + ": " + e.what());
    }
  }
  return q;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw io_error("write to " + path + " failed");
}

// Content digest echoed by the generator so runs can be tied to exact inputs.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace potts

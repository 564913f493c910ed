#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "densreg/errors.hpp"
#include "densreg/types.hpp"

namespace densreg {

enum class DatasetKind { Labeled, Unlabeled };

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_field(const std::string& field, const std::string& path,
                                 std::size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw parse_error(path + ": line " + std::to_string(line_no) +
                      ": cannot parse number '" + field + "'");
  if (!std::isfinite(v))
    throw validation_error(path + ": line " + std::to_string(line_no) +
                           ": non-finite value '" + field + "'");
  return v;
}

// Header must be exactly x1,...,xd with an optional trailing y column.
inline std::pair<int, bool> parse_header(const std::vector<std::string>& fields,
                                         const std::string& path) {
  bool has_y = !fields.empty() && fields.back() == "y";
  const std::size_t ncoord = fields.size() - (has_y ? 1 : 0);
  if (ncoord == 0)
    throw schema_error(path + ": header has no coordinate columns");
  for (std::size_t k = 0; k < ncoord; ++k) {
    if (fields[k] != "x" + std::to_string(k + 1))
      throw schema_error(path + ": header column " + std::to_string(k + 1) +
                         " is '" + fields[k] + "', expected 'x" + std::to_string(k + 1) + "'");
  }
  return {static_cast<int>(ncoord), has_y};
}

inline std::string format_full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RawTable {
  int d = 0;
  bool has_y = false;
  std::vector<Point> points;
  std::vector<double> labels;
};

inline RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw schema_error(path + ": empty file, header required");
  RawTable t;
  auto [d, has_y] = parse_header(split_csv_line(line), path);
  t.d = d;
  t.has_y = has_y;
  const std::size_t expect = static_cast<std::size_t>(d) + (has_y ? 1 : 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expect)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expect) + " fields, got " +
                        std::to_string(fields.size()));
    Point p;
    p.coords.reserve(d);
    for (int k = 0; k < d; ++k)
      p.coords.push_back(parse_double_field(fields[k], path, line_no));
    t.points.push_back(std::move(p));
    if (has_y) t.labels.push_back(parse_double_field(fields[d], path, line_no));
  }
  return t;
}

}  // namespace detail

inline LabeledSet load_labeled(const std::string& path) {
  auto t = detail::read_table(path);
  if (!t.has_y) throw schema_error(path + ": labeled dataset requires a trailing 'y' column");
  LabeledSet set(std::move(t.points), std::move(t.labels));
  set.validate();
  return set;
}

inline UnlabeledSet load_unlabeled(const std::string& path) {
  auto t = detail::read_table(path);
  if (t.has_y)
    throw schema_error(path + ": unlabeled dataset must not carry a 'y' column");
  UnlabeledSet set(std::move(t.points));
  set.validate();
  return set;
}

inline std::variant<LabeledSet, UnlabeledSet> load_dataset(const std::string& path,
                                                           DatasetKind kind) {
  if (kind == DatasetKind::Labeled) return load_labeled(path);
  return load_unlabeled(path);
}

namespace detail {

inline void write_rows(std::ofstream& out, const std::vector<Point>& pts,
                       const std::vector<double>* labels) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < pts[i].dim(); ++k) {
      if (k) out << ',';
      out << format_full_precision(pts[i][k]);
    }
    if (labels) out << ',' << format_full_precision((*labels)[i]);
    out << '\n';
  }
}

}  // namespace detail

/// Writes with 17 significant digits so load(save(s)) reproduces s bit-exactly.
inline void save_dataset(const LabeledSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  for (int k = 1; k <= set.dim(); ++k) out << (k > 1 ? ",x" : "x") << k;
  out << ",y\n";
  detail::write_rows(out, set.points, &set.labels);
  out.flush();
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline void save_dataset(const UnlabeledSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  for (int k = 1; k <= set.dim(); ++k) out << (k > 1 ? ",x" : "x") << k;
  out << '\n';
  detail::write_rows(out, set.points, nullptr);
  out.flush();
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace densreg

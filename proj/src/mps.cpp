#include "icegrid/mps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "icegrid/error.hpp"

namespace icegrid::mps {

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

// fields start at columns 2, 5, 15, 25, 40, 50; an overlong number pushes the rest right
std::string card(const std::string& f1, const std::string& f2, const std::string& f3 = {},
                 const std::string& f4 = {}, const std::string& f5 = {}, const std::string& f6 = {}) {
  static constexpr std::size_t kStart[] = {1, 4, 14, 24, 39, 49};
  const std::string* fields[] = {&f1, &f2, &f3, &f4, &f5, &f6};
  std::string s;
  for (int k = 0; k < 6; ++k) {
    if (fields[k]->empty()) continue;
    if (s.size() < kStart[k]) s.append(kStart[k] - s.size(), ' ');
    else if (!s.empty()) s += ' ';
    s += *fields[k];
  }
  return s + "\n";
}

std::string make_name(char prefix, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07d", prefix, k + 1);
  return buf;
}

}  // namespace

std::string column_name(int j) { return make_name('C', j); }
std::string row_name(int i) { return make_name('R', i); }

void write(const Model& model, std::ostream& out, const std::string& name) {
  const int n = model.num_cols(), m = model.num_rows();
  out << "NAME          " << name << "\n";
  for (int j = 0; j < n; ++j)
    if (j < static_cast<int>(model.col_names.size()) && !model.col_names[j].empty())
      out << "* " << column_name(j) << " " << model.col_names[j] << "\n";
  for (int i = 0; i < m; ++i)
    if (i < static_cast<int>(model.row_names.size()) && !model.row_names[i].empty())
      out << "* " << row_name(i) << " " << model.row_names[i] << "\n";

  out << "ROWS\n" << card("N", "OBJ");
  std::vector<char> type(m);
  for (int i = 0; i < m; ++i) {
    const double lo = model.row_lower[i], hi = model.row_upper[i];
    if (lo == hi) type[i] = 'E';
    else if (std::isfinite(lo)) type[i] = 'G';
    else if (std::isfinite(hi)) type[i] = 'L';
    else type[i] = 'N';
    out << card(std::string(1, type[i]), row_name(i));
  }

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    const bool integer = model.is_integer[j] != 0;
    if (integer != in_int) {
      out << card("", make_name('M', marker++), "'MARKER'", "", integer ? "'INTORG'" : "'INTEND'");
      in_int = integer;
    }
    const std::string cn = column_name(j);
    if (model.cost[j] != 0.0) out << card("", cn, "OBJ", num(model.cost[j]));
    for (int k = model.col_start[j]; k < model.col_start[j + 1]; ++k)
      out << card("", cn, row_name(model.row_index[k]), num(model.value[k]));
    if (model.cost[j] == 0.0 && model.col_start[j] == model.col_start[j + 1]) out << card("", cn, "OBJ", "0");
  }
  if (in_int) out << card("", make_name('M', marker++), "'MARKER'", "", "'INTEND'");

  out << "RHS\n";
  if (model.objective_offset != 0.0) out << card("", "RHS", "OBJ", num(-model.objective_offset));
  for (int i = 0; i < m; ++i) {
    double rhs = 0.0;
    if (type[i] == 'E' || type[i] == 'G') rhs = model.row_lower[i];
    else if (type[i] == 'L') rhs = model.row_upper[i];
    if (rhs != 0.0) out << card("", "RHS", row_name(i), num(rhs));
  }

  bool any_range = false;
  for (int i = 0; i < m; ++i) {
    if (type[i] != 'G' || !std::isfinite(model.row_upper[i])) continue;
    if (!any_range) out << "RANGES\n";
    any_range = true;
    const double lo = model.row_lower[i], hi = model.row_upper[i];
    double r = hi - lo;
    for (int k = 0; k < 8 && lo + r != hi; ++k) r = std::nextafter(r, lo + r < hi ? kInf : -kInf);
    out << card("", "RNG", row_name(i), num(r));
  }

  out << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const double lo = model.col_lower[j], hi = model.col_upper[j];
    const std::string cn = column_name(j);
    if (lo == hi) {
      out << card("FX", "BND", cn, num(lo));
      continue;
    }
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << card("FR", "BND", cn);
      continue;
    }
    if (!std::isfinite(lo)) out << card("MI", "BND", cn);
    else if (lo != 0.0) out << card("LO", "BND", cn, num(lo));
    if (std::isfinite(hi)) out << card("UP", "BND", cn, num(hi));
    else if (model.is_integer[j]) out << card("PL", "BND", cn);
  }
  out << "ENDATA\n";
}

void write_file(const Model& model, const std::string& path, const std::string& name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(model, out, name);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Model read(std::istream& in, const std::string& source) {
  enum class Section { None, Rows, Columns, Rhs, Ranges, Bounds, End } sec = Section::None;
  std::unordered_map<std::string, int> rows, cols;
  std::vector<char> rtype;
  std::string objective_row;
  Model m;
  m.col_start.clear();
  std::vector<std::vector<std::pair<int, double>>> colent;
  bool integer_mode = false;
  std::vector<std::uint8_t> bounded_up;
  std::vector<double> rhs;
  std::vector<std::pair<int, double>> ranges;
  int lineno = 0;
  std::string line;

  const auto fail = [&](const std::string& msg) { throw ParseError(source, "line " + std::to_string(lineno) + ": " + msg); };
  const auto parse_num = [&](const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc{} || r.ptr != e) fail("bad number '" + s + "'");
    return v;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string t; ls >> t;) f.push_back(t);
    if (f.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const std::string& h = f[0];
      if (h == "NAME") sec = Section::None;
      else if (h == "ROWS") sec = Section::Rows;
      else if (h == "COLUMNS") sec = Section::Columns;
      else if (h == "RHS") sec = Section::Rhs;
      else if (h == "RANGES") sec = Section::Ranges;
      else if (h == "BOUNDS") sec = Section::Bounds;
      else if (h == "ENDATA") { sec = Section::End; break; }
      else fail("unknown section '" + h + "'");
      continue;
    }
    switch (sec) {
      case Section::Rows: {
        if (f.size() != 2) fail("ROWS entry needs type and name");
        const char t = f[0].size() == 1 ? f[0][0] : '?';
        if (t == 'N' && objective_row.empty()) {
          objective_row = f[1];
          break;
        }
        if (t != 'N' && t != 'E' && t != 'L' && t != 'G') fail("bad row type '" + f[0] + "'");
        if (rows.count(f[1])) fail("duplicate row '" + f[1] + "'");
        rows.emplace(f[1], static_cast<int>(rtype.size()));
        rtype.push_back(t);
        m.row_names.push_back(f[1]);
        break;
      }
      case Section::Columns: {
        if (f.size() >= 3 && f[1] == "'MARKER'") {
          const std::string& k = f.back();
          if (k == "'INTORG'") integer_mode = true;
          else if (k == "'INTEND'") integer_mode = false;
          else fail("bad marker '" + k + "'");
          break;
        }
        if (f.size() != 3 && f.size() != 5) fail("COLUMNS entry needs 3 or 5 fields");
        auto it = cols.find(f[0]);
        int j;
        if (it == cols.end()) {
          j = static_cast<int>(m.cost.size());
          cols.emplace(f[0], j);
          m.col_names.push_back(f[0]);
          m.cost.push_back(0.0);
          m.col_lower.push_back(0.0);
          m.col_upper.push_back(kInf);
          m.is_integer.push_back(integer_mode ? 1 : 0);
          colent.emplace_back();
        } else {
          j = it->second;
        }
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          const double v = parse_num(f[k + 1]);
          if (f[k] == objective_row) {
            m.cost[j] = v;
            continue;
          }
          const auto r = rows.find(f[k]);
          if (r == rows.end()) fail("unknown row '" + f[k] + "'");
          if (v != 0.0) colent[j].emplace_back(r->second, v);
        }
        break;
      }
      case Section::Rhs:
      case Section::Ranges: {
        if (f.size() != 3 && f.size() != 5 && f.size() != 2 && f.size() != 4) fail("RHS/RANGES entry malformed");
        const std::size_t start = (f.size() % 2 == 1) ? 1 : 0;
        rhs.resize(rtype.size(), 0.0);
        for (std::size_t k = start; k + 1 < f.size(); k += 2) {
          const double v = parse_num(f[k + 1]);
          if (f[k] == objective_row) {
            if (sec == Section::Rhs) m.objective_offset = -v;
            continue;
          }
          const auto r = rows.find(f[k]);
          if (r == rows.end()) fail("unknown row '" + f[k] + "'");
          if (sec == Section::Rhs) rhs[r->second] = v;
          else ranges.emplace_back(r->second, v);
        }
        break;
      }
      case Section::Bounds: {
        if (f.size() < 3) fail("BOUNDS entry malformed");
        const std::string& t = f[0];
        const bool valued = t == "UP" || t == "LO" || t == "FX" || t == "LI" || t == "UI";
        const std::string& cname = valued ? (f.size() >= 4 ? f[2] : f[1]) : (f.size() >= 3 ? f[2] : f[1]);
        const auto it = cols.find(cname);
        if (it == cols.end()) fail("unknown column '" + cname + "'");
        const int j = it->second;
        double v = 0.0;
        if (valued) v = parse_num(f.back());
        if (t == "UP" || t == "UI") m.col_upper[j] = v;
        else if (t == "LO" || t == "LI") m.col_lower[j] = v;
        else if (t == "FX") m.col_lower[j] = m.col_upper[j] = v;
        else if (t == "FR") { m.col_lower[j] = -kInf; m.col_upper[j] = kInf; }
        else if (t == "MI") m.col_lower[j] = -kInf;
        else if (t == "PL") m.col_upper[j] = kInf;
        else if (t == "BV") { m.col_lower[j] = 0.0; m.col_upper[j] = 1.0; m.is_integer[j] = 1; }
        else fail("unknown bound type '" + t + "'");
        if (t == "LI" || t == "UI") m.is_integer[j] = 1;
        break;
      }
      default: fail("data outside a section");
    }
  }
  if (sec != Section::End) throw ParseError(source, "missing ENDATA");

  const int nr = static_cast<int>(rtype.size());
  rhs.resize(nr, 0.0);
  m.row_lower.resize(nr);
  m.row_upper.resize(nr);
  for (int i = 0; i < nr; ++i) {
    switch (rtype[i]) {
      case 'E': m.row_lower[i] = m.row_upper[i] = rhs[i]; break;
      case 'L': m.row_lower[i] = -kInf; m.row_upper[i] = rhs[i]; break;
      case 'G': m.row_lower[i] = rhs[i]; m.row_upper[i] = kInf; break;
      default: m.row_lower[i] = -kInf; m.row_upper[i] = kInf; break;
    }
  }
  for (const auto& [i, r] : ranges) {
    switch (rtype[i]) {
      case 'G': m.row_upper[i] = rhs[i] + std::abs(r); break;
      case 'L': m.row_lower[i] = rhs[i] - std::abs(r); break;
      case 'E':
        if (r >= 0) m.row_upper[i] = rhs[i] + r;
        else m.row_lower[i] = rhs[i] + r;
        break;
      default: break;
    }
  }
  m.col_start.assign(1, 0);
  for (auto& ent : colent) {
    std::sort(ent.begin(), ent.end());
    for (const auto& [r, v] : ent) {
      m.row_index.push_back(r);
      m.value.push_back(v);
    }
    m.col_start.push_back(static_cast<int>(m.row_index.size()));
  }
  return m;
}

Model read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open MPS file");
  return read(in, path);
}

}  // namespace icegrid::mps

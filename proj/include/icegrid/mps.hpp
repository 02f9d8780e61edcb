#pragma once

#include <iosfwd>
#include <string>

#include "icegrid/model.hpp"

namespace icegrid::mps {

/// Generated 8-character names used in the MPS file (C0000001, R0000001, ...).
std::string column_name(int j);
std::string row_name(int i);

/// Fixed-format MPS. Numbers are written in shortest round-trip form, so a
/// re-parse reproduces every coefficient and bound bit for bit. Original
/// names are listed in comment lines.
void write(const Model& model, std::ostream& out, const std::string& name = "ICEGRID");
void write_file(const Model& model, const std::string& path, const std::string& name = "ICEGRID");

/// Parses MPS (fixed or free spacing; fields are whitespace separated).
Model read(std::istream& in, const std::string& source = "<stream>");
Model read_file(const std::string& path);

}  // namespace icegrid::mps

#pragma once

#include "coulomb/fields.hpp"

#include <iosfwd>
#include <string>

namespace coulomb {

// Grid files start with a single JSON line describing the geometry:
//   {"format":"coulomb-grid","version":1,"encoding":"binary"|"csv","dim":2,
//    "n":[n0,n1,n2],"lo":[..],"hi":[..],"h":[..],"byte_order":"little",
//    "layout":"first-axis-fastest"}
// Binary files follow it with size() little-endian float64 values.
// CSV files follow it with a "i,j,k,x,y,z,value" header and one row per cell.
enum class GridEncoding { binary, csv };

void save_grid(const GridFunction& f, const std::string& path, GridEncoding enc = GridEncoding::binary);
GridFunction load_grid(const std::string& path);

void write_grid(const GridFunction& f, std::ostream& os, GridEncoding enc);
GridFunction read_grid(std::istream& is);

}  // namespace coulomb

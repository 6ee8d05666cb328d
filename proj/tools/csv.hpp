#pragma once

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace coulomb::tools {

// RFC 4180 quoting: fields with a comma, quote or line break are quoted.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_field(cells[i]);
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

}  // namespace coulomb::tools

#include "iirpl/coeff_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "iirpl/errors.hpp"

namespace iirpl {

void write_coefficients(std::ostream& os, const SosCascade& cascade) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  os << "# iirpl cascade: h0, then a0 a1 b0 b1 per section\n";
  os << cascade.h0() << '\n';
  for (const Biquad& s : cascade.sections()) {
    os << s.a0 << ' ' << s.a1 << ' ' << s.b0 << ' ' << s.b1 << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

SosCascade read_coefficients(std::istream& is) {
  std::string line;
  int line_no = 0;
  bool have_gain = false;
  double h0 = 0.0;
  std::vector<Biquad> sections;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> values;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    if (!have_gain) {
      if (values.size() != 1) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected the gain h0");
      }
      h0 = values[0];
      have_gain = true;
    } else {
      if (values.size() != 4) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected a0 a1 b0 b1");
      }
      sections.push_back({values[0], values[1], values[2], values[3]});
    }
  }
  if (!have_gain) throw Error(ErrorCode::ParseError, "no gain value found");
  return SosCascade(h0, std::move(sections));
}

void save_coefficients(const std::filesystem::path& path, const SosCascade& cascade) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  write_coefficients(os, cascade);
}

SosCascade load_coefficients(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  try {
    return read_coefficients(is);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace iirpl

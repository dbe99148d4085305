#pragma once

#include <filesystem>
#include <iosfwd>

#include "iirpl/sos.hpp"

namespace iirpl {

// Plain-text coefficient interchange: first value h0, then one line per
// section `a0 a1 b0 b1`, all with 17 significant digits. Lines starting with
// '#' are comments.
void write_coefficients(std::ostream& os, const SosCascade& cascade);
SosCascade read_coefficients(std::istream& is);

void save_coefficients(const std::filesystem::path& path, const SosCascade& cascade);
SosCascade load_coefficients(const std::filesystem::path& path);

}  // namespace iirpl

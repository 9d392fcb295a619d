#pragma once

#include <span>
#include <string>

namespace nsem {

// 17 significant digits via to_chars: round-trip exact, locale independent,
// byte-stable across runs. All CSV output goes through this.
std::string format_double(double v);

// Appends "v1,v2,...\n" formatted with format_double.
void append_csv_row(std::string& out, std::span<const double> values);

}  // namespace nsem

#include "nsem/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace nsem {

std::string format_double(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

void append_csv_row(std::string& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out.push_back(',');
    out += format_double(values[i]);
  }
  out.push_back('\n');
}

}  // namespace nsem

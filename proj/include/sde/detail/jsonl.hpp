#pragma once

#include <fstream>
#include <string>

#include "sde/error.hpp"

namespace sde {

template <typename F>
void read_jsonl(const std::filesystem::path& path, F&& on_line) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      on_line(j, line_no);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ParseError) throw;
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace sde

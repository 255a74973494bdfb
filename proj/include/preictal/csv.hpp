#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace preictal::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Strict numeric parse of a whole cell; throws ValidationError naming `context`.
double to_double(std::string_view cell, const std::string& context);

/// Fixed-precision formatting used by every CSV the engine writes.
std::string fixed(double v, int decimals = 6);

/// Reads every non-empty line of a text file. Throws IoError when unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Opens a file for writing, creating parent directories. Throws IoError.
std::ofstream open_out(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace preictal::csv

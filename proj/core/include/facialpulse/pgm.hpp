#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "facialpulse/imaging.hpp"

namespace facialpulse {

// Binary 8-bit PGM ("P5", maxval 255). Anything else is rejected with a
// kFormat error naming the file.
GrayFrame decode_pgm(const std::string& bytes, const std::string& source_name = "<memory>",
                     int frame_index = 0);
GrayFrame read_pgm(const std::filesystem::path& path, int frame_index = 0);

// Intensities are rounded to the nearest integer.
std::string encode_pgm(const GrayFrame& frame);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

// All *.pgm files of a directory in lexicographic filename order; frame
// indices are assigned 0, 1, 2, ... in that order.
std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& directory);
std::vector<GrayFrame> read_pgm_directory(const std::filesystem::path& directory);

}  // namespace facialpulse

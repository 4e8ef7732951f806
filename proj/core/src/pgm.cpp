#include "facialpulse/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "facialpulse/error.hpp"

namespace facialpulse {
namespace {

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail(ErrorCode::kFormat, source_ + ": " + what + " too large");
      ++pos_;
    }
    if (pos_ == start) fail(ErrorCode::kFormat, source_ + ": expected " + what + " in PGM header");
    return static_cast<int>(value);
  }

  std::size_t pos_ = 0;

 private:
  const std::string& bytes_;
  const std::string& source_;
};

}  // namespace

GrayFrame decode_pgm(const std::string& bytes, const std::string& source_name, int frame_index) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    fail(ErrorCode::kFormat, source_name + ": not a binary PGM (magic P5 required)");
  }
  HeaderReader header(bytes, source_name);
  header.pos_ = 2;
  const int width = header.read_int("width");
  const int height = header.read_int("height");
  const int maxval = header.read_int("maxval");
  if (width < 1 || height < 1) fail(ErrorCode::kFormat, source_name + ": empty image");
  if (maxval != 255) {
    fail(ErrorCode::kFormat, source_name + ": maxval must be 255, got " + std::to_string(maxval));
  }
  if (header.pos_ >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[header.pos_]))) {
    fail(ErrorCode::kFormat, source_name + ": missing whitespace after PGM header");
  }
  ++header.pos_;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - header.pos_ < count) {
    fail(ErrorCode::kFormat, source_name + ": truncated pixel data");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<unsigned char>(bytes[header.pos_ + i]);
  }
  return GrayFrame(width, height, std::move(values), frame_index);
}

GrayFrame read_pgm(const std::filesystem::path& path, int frame_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes, path.string(), frame_index);
}

std::string encode_pgm(const GrayFrame& frame) {
  std::ostringstream header;
  header << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  std::string out = header.str();
  out.reserve(out.size() + frame.pixels().size());
  for (double v : frame.pixels().values()) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)))));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  const std::string bytes = encode_pgm(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& directory) {
  std::error_code ec;
  if (!std::filesystem::is_directory(directory, ec)) {
    fail(ErrorCode::kIo, "frame directory not found: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

std::vector<GrayFrame> read_pgm_directory(const std::filesystem::path& directory) {
  const auto files = list_pgm_files(directory);
  std::vector<GrayFrame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    frames.push_back(read_pgm(files[i], static_cast<int>(i)));
  }
  return frames;
}

}  // namespace facialpulse

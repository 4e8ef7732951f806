#include "facialpulse/landmark_io.hpp"

#include <sstream>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse {

LandmarkSequence parse_landmark_csv(const std::string& text, const std::string& source_name,
                                    LandmarkSource source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto where = [&] { return source_name + ":" + std::to_string(line_no) + ": "; };

  if (!std::getline(in, line)) fail(ErrorCode::kFormat, source_name + ": empty landmark file");
  ++line_no;
  if (trim(line) != "frame,landmark,x,y") {
    fail(ErrorCode::kFormat, where() + "expected header 'frame,landmark,x,y'");
  }

  LandmarkSequence frames;
  int expected_count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 4) fail(ErrorCode::kFormat, where() + "expected 4 fields");
    const auto frame = parse_integer(fields[0]);
    const auto landmark = parse_integer(fields[1]);
    const auto x = parse_real(fields[2]);
    const auto y = parse_real(fields[3]);
    if (!frame || *frame < 0) fail(ErrorCode::kFormat, where() + "bad frame index");
    if (!landmark || *landmark < 0) fail(ErrorCode::kFormat, where() + "bad landmark index");
    if (!x || !y) fail(ErrorCode::kFormat, where() + "bad coordinate");

    if (frames.empty() || frames.back().frame_index != *frame) {
      if (!frames.empty()) {
        if (*frame < frames.back().frame_index) fail(ErrorCode::kFormat, where() + "rows not sorted by frame");
        const int got = static_cast<int>(frames.back().points.size());
        if (expected_count < 0) expected_count = got;
        if (got != expected_count) {
          fail(ErrorCode::kFormat, where() + "frame " + std::to_string(frames.back().frame_index) +
                                       " has " + std::to_string(got) + " landmarks, expected " +
                                       std::to_string(expected_count));
        }
      }
      LandmarkFrame f;
      f.frame_index = static_cast<int>(*frame);
      f.source = source;
      frames.push_back(std::move(f));
    }
    auto& current = frames.back();
    if (*landmark != static_cast<long long>(current.points.size())) {
      fail(ErrorCode::kFormat, where() + "landmark " + std::to_string(*landmark) +
                                   " out of order (expected " +
                                   std::to_string(current.points.size()) + ")");
    }
    current.points.emplace_back(*x, *y);
  }
  if (frames.empty()) fail(ErrorCode::kFormat, source_name + ": no landmark rows");
  const int last = static_cast<int>(frames.back().points.size());
  if (expected_count >= 0 && last != expected_count) {
    fail(ErrorCode::kFormat, source_name + ": final frame has " + std::to_string(last) +
                                 " landmarks, expected " + std::to_string(expected_count));
  }
  return frames;
}

LandmarkSequence read_landmark_csv(const std::string& path, LandmarkSource source) {
  return parse_landmark_csv(read_text_file(path), path, source);
}

std::string format_landmark_csv(const LandmarkSequence& frames) {
  std::string out = "frame,landmark,x,y\n";
  for (const auto& f : frames) {
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      out += std::to_string(f.frame_index);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += format_real(f.points[j].x());
      out += ',';
      out += format_real(f.points[j].y());
      out += '\n';
    }
  }
  return out;
}

void write_landmark_csv(const std::string& path, const LandmarkSequence& frames) {
  write_text_file(path, format_landmark_csv(frames));
}

}  // namespace facialpulse

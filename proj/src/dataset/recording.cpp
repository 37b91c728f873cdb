#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

namespace {

constexpr std::array<const char*, 16> kColumns = {"t",   "cam_x", "cam_y", "cam_z", "p1x", "p1y",
                                                  "p1z", "g1",    "p2x",   "p2y",   "p2z", "g2",
                                                  "p3x", "p3y",   "p3z",   "g3"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string feature_name(std::size_t column) {
  static constexpr std::array<const char*, kFeaturesPerInstrument> kinds = {"p_x", "p_y", "p_z", "v_x",
                                                                           "v_y", "v_z", "g"};
  const std::size_t inst = column / kFeaturesPerInstrument + 1;
  std::string name = kinds.at(column % kFeaturesPerInstrument);
  name.insert(1, std::to_string(inst));
  return name;
}

KinematicRecording load_recording(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  std::string_view rest(text);
  std::size_t line_no = 0;

  auto next_line = [&](std::string_view& line) {
    if (rest.empty()) return false;
    const auto nl = rest.find('\n');
    line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) fail(ErrorKind::Format, path.string() + ": empty file");
  const auto header = split_commas(line);
  std::map<std::string, std::size_t, std::less<>> where;
  for (std::size_t i = 0; i < header.size(); ++i) where.emplace(std::string(header[i]), i);
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    auto it = where.find(kColumns[k]);
    if (it == where.end()) fail(ErrorKind::Format, path.string() + ": missing column '" + kColumns[k] + "'");
    col[k] = it->second;
  }

  std::array<std::vector<double>, kColumns.size()> data;
  while (next_line(line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      fail(ErrorKind::Format, path.string() + ": row " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
      const auto cell = cells[col[k]];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        fail(ErrorKind::Format, path.string() + ": column '" + kColumns[k] + "' row " + std::to_string(line_no) +
                                    ": non-finite or malformed value '" + std::string(cell) + "'");
      data[k].push_back(v);
    }
  }

  const auto& t = data[0];
  const std::size_t n = t.size();
  if (n < 2) fail(ErrorKind::TooShortInput, path.string() + ": need at least 2 samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1]))
      fail(ErrorKind::NonMonotonicTime, path.string() + ": time not increasing at row " + std::to_string(i + 2));
  const double dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 0.1 * dt)
      fail(ErrorKind::Format, path.string() + ": non-uniform sampling at row " + std::to_string(i + 2));

  KinematicRecording rec;
  rec.id = path.stem().string();
  rec.dt = dt;
  rec.time = t;
  for (std::size_t a = 0; a < 3; ++a) rec.camera_position[a] = {std::move(data[1 + a]), dt};
  for (std::size_t i = 0; i < kNumInstruments; ++i) {
    const std::size_t base = 4 + 4 * i;
    for (std::size_t a = 0; a < 3; ++a) rec.instruments[i].position[a] = {std::move(data[base + a]), dt};
    rec.instruments[i].gripper_angle = {std::move(data[base + 3]), dt};
  }
  return rec;
}

std::string recording_to_csv(const KinematicRecording& rec) {
  std::string out;
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (k) out += ',';
    out += kColumns[k];
  }
  out += '\n';
  const std::size_t n = rec.size();
  out.reserve(out.size() + n * 16 * 24);
  char buf[32];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
  };
  for (std::size_t r = 0; r < n; ++r) {
    put(rec.time.empty() ? static_cast<double>(r) * rec.dt : rec.time[r]);
    for (std::size_t a = 0; a < 3; ++a) {
      out += ',';
      put(rec.camera_position[a].values[r]);
    }
    for (const auto& inst : rec.instruments) {
      for (std::size_t a = 0; a < 3; ++a) {
        out += ',';
        put(inst.position[a].values[r]);
      }
      out += ',';
      put(inst.gripper_angle.values[r]);
    }
    out += '\n';
  }
  return out;
}

void save_recording(const std::filesystem::path& path, const KinematicRecording& rec) {
  io::write_atomic(path, recording_to_csv(rec));
}

}  // namespace camseer::dataset

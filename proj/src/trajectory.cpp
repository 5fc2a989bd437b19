#include "resonant/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace resonant {

namespace {

constexpr std::size_t kColumns = 13;

PoseFrame from_row(const std::vector<double>& v) {
  PoseFrame f;
  f.time = v[0];
  for (int i = 0; i < 3; ++i) {
    f.violin.position[i] = v[1 + i];
    f.violin.orientation[i] = v[4 + i];
    f.bow.position[i] = v[7 + i];
    f.bow.orientation[i] = v[10 + i];
  }
  return f;
}

Vec3 lerp(const Vec3& a, const Vec3& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

}  // namespace

Trajectory::Trajectory(std::vector<PoseFrame> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw std::invalid_argument("trajectory needs at least one frame");
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (!(frames_[i].time > frames_[i - 1].time)) {
      throw std::invalid_argument("trajectory times must strictly increase (frame " + std::to_string(i) + ")");
    }
  }
}

PoseFrame Trajectory::sample(double t, Interpolation mode) const {
  if (t <= frames_.front().time) return {t, frames_.front().violin, frames_.front().bow};
  if (t >= frames_.back().time) return {t, frames_.back().violin, frames_.back().bow};
  const auto next = std::upper_bound(frames_.begin(), frames_.end(), t,
                                     [](double time, const PoseFrame& f) { return time < f.time; });
  const auto& b = *next;
  const auto& a = *(next - 1);
  if (mode == Interpolation::StepHold || t == a.time) return {t, a.violin, a.bow};
  const double u = (t - a.time) / (b.time - a.time);
  PoseFrame f;
  f.time = t;
  f.violin = {lerp(a.violin.position, b.violin.position, u), lerp(a.violin.orientation, b.violin.orientation, u)};
  f.bow = {lerp(a.bow.position, b.bow.position, u), lerp(a.bow.orientation, b.bow.orientation, u)};
  return f;
}

PoseFrame Trajectory::sample_looped(double t, Interpolation mode) const {
  const double period = duration();
  if (!(period > 0.0)) return sample(t, mode);
  auto f = sample(std::fmod(std::max(t, 0.0), period), mode);
  f.time = t;
  return f;
}

Trajectory parse_trajectory(std::string_view text) {
  std::vector<PoseFrame> frames;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> values;
    std::string token;
    bool numeric = true;
    while (row >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (frames.empty() && values.empty()) continue;  // header
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (values.size() != kColumns) {
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": expected 13 columns, found " +
                               std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": non-finite value");
    }
    frames.push_back(from_row(values));
  }
  return Trajectory(std::move(frames));
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open trajectory '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return parse_trajectory(buf.str());
}

}  // namespace resonant

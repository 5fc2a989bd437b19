#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fixture {

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("resonant-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::trunc) << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Ten resonances at 220·k Hz.
inline std::string model_text(double narrow_t60 = 0.3) {
  std::ostringstream out;
  out << "@f0 220\n";
  for (int k = 1; k <= 10; ++k) out << 220.0 * k << ' ' << 1.0 / k << ' ' << (k == 1 ? narrow_t60 : 0.3) << '\n';
  return out.str();
}

// Codomain row for corner c of the unit square: [gain, freq, decay] x 10.
inline std::vector<double> corner_row(int c) {
  std::vector<double> row;
  for (int k = 1; k <= 10; ++k) {
    row.push_back(0.2 + 0.1 * c + 0.01 * k);
    row.push_back(200.0 * k + 15.0 * c);
    row.push_back(0.1 + 0.05 * c);
  }
  return row;
}

inline std::string map_text(std::size_t dim = 30) {
  const double xy[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::ostringstream out;
  out.precision(17);
  out << "n " << dim << '\n';
  for (int c = 0; c < 4; ++c) {
    out << xy[c][0] << ' ' << xy[c][1] << " :";
    auto row = corner_row(c);
    row.resize(dim, 0.5);
    for (double v : row) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

// Violin at (x, y, z), bow at the origin, for every listed time.
inline std::string trajectory_text(const std::vector<std::array<double, 4>>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "time_s,vx,vy,vz,vyaw,vpitch,vroll,bx,by,bz,byaw,bpitch,broll\n";
  for (const auto& r : rows) out << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ",0,0,0,0,0,0,0,0,0\n";
  return out.str();
}

}  // namespace fixture

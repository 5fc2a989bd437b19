#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace resonant {

struct WavData {
  std::uint32_t sample_rate = 44100;
  std::vector<double> samples;  // mono, full scale = 1.0
};

// Mono 16-bit PCM or 32-bit float. Throws std::runtime_error otherwise.
WavData read_wav(const std::string& path);

// Writes mono 32-bit float. The file appears atomically (temp + rename).
void write_wav(const std::string& path, std::uint32_t sample_rate, std::span<const double> samples);

// Streaming mono float writer. Data goes to `<path>.part`; finish() patches
// (or the destructor) patches the header and renames it into place, so a
// killed process never leaves a truncated file at `path`.
class WavWriter {
 public:
  WavWriter(std::string path, std::uint32_t sample_rate);
  ~WavWriter();
  WavWriter(const WavWriter&) = delete;
  WavWriter& operator=(const WavWriter&) = delete;

  void write(std::span<const double> samples);
  void finish();

 private:
  std::string path_;
  std::string part_;
  std::FILE* file_ = nullptr;
  std::uint32_t sample_rate_;
  std::uint64_t frames_ = 0;
};

}  // namespace resonant

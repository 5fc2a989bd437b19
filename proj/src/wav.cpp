#include "resonant/wav.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace resonant {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::vector<std::uint8_t> float_header(std::uint32_t sample_rate, std::uint64_t frames) {
  const auto data_bytes = static_cast<std::uint32_t>(frames * 4);
  std::vector<std::uint8_t> h;
  h.insert(h.end(), {'R', 'I', 'F', 'F'});
  put32(h, 36 + data_bytes);
  h.insert(h.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(h, 16);
  put16(h, 3);  // IEEE float
  put16(h, 1);
  put32(h, sample_rate);
  put32(h, sample_rate * 4);
  put16(h, 4);
  put16(h, 32);
  h.insert(h.end(), {'d', 'a', 't', 'a'});
  put32(h, data_bytes);
  return h;
}

void append_floats(std::vector<std::uint8_t>& out, std::span<const double> samples) {
  for (double s : samples) put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open WAV file '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& why) { return std::runtime_error("'" + path + "': " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = le32(bytes.data() + pos + 4);
    const std::uint8_t* body = bytes.data() + pos + 8;
    if (pos + 8 + size > bytes.size()) throw fail("chunk runs past end of file");
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw fail("short fmt chunk");
      format = le16(body);
      channels = le16(body + 2);
      rate = le32(body + 4);
      bits = le16(body + 14);
      if (format == 0xFFFE && size >= 26) format = le16(body + 24);  // extensible subformat
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (channels != 1) throw fail("expected mono audio, found " + std::to_string(channels) + " channels");
      WavData wav;
      wav.sample_rate = rate;
      if (format == 1 && bits == 16) {
        wav.samples.resize(size / 2);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          wav.samples[i] = static_cast<std::int16_t>(le16(body + 2 * i)) / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        wav.samples.resize(size / 4);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          wav.samples[i] = std::bit_cast<float>(le32(body + 4 * i));
        }
      } else {
        throw fail("unsupported sample format (need 16-bit PCM or 32-bit float)");
      }
      return wav;
    }
    pos += 8 + size + (size & 1);
  }
  throw fail("no data chunk");
}

void write_wav(const std::string& path, std::uint32_t sample_rate, std::span<const double> samples) {
  auto bytes = float_header(sample_rate, samples.size());
  append_floats(bytes, samples);
  const std::string part = path + ".part";
  {
    std::ofstream out(part, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + part + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write to '" + part + "' failed");
  }
  std::filesystem::rename(part, path);
}

WavWriter::WavWriter(std::string path, std::uint32_t sample_rate)
    : path_(std::move(path)), part_(path_ + ".part"), sample_rate_(sample_rate) {
  file_ = std::fopen(part_.c_str(), "wb");
  if (file_ == nullptr) throw std::runtime_error("cannot write '" + part_ + "'");
  const auto header = float_header(sample_rate_, 0);
  std::fwrite(header.data(), 1, header.size(), file_);
}

WavWriter::~WavWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void WavWriter::write(std::span<const double> samples) {
  if (file_ == nullptr) throw std::logic_error("WAV writer already finished");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(samples.size() * 4);
  append_floats(bytes, samples);
  if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size()) {
    throw std::runtime_error("write to '" + part_ + "' failed");
  }
  frames_ += samples.size();
}

void WavWriter::finish() {
  if (file_ == nullptr) return;
  const auto header = float_header(sample_rate_, frames_);
  std::fseek(file_, 0, SEEK_SET);
  std::fwrite(header.data(), 1, header.size(), file_);
  std::fclose(file_);
  file_ = nullptr;
  std::filesystem::rename(part_, path_);
}

}  // namespace resonant

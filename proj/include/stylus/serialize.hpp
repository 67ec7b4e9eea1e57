#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "stylus/common.hpp"

namespace stylus {

// Little-endian binary container used by every *.bin artifact. Each file
// starts with the magic "STY1", a four-char kind tag and a format version.
constexpr uint32_t kContainerMagic = 0x31595453;  // "STY1"

inline constexpr uint32_t fourcc(char a, char b, char c, char d) {
  return static_cast<uint32_t>(static_cast<uint8_t>(a)) |
         static_cast<uint32_t>(static_cast<uint8_t>(b)) << 8 |
         static_cast<uint32_t>(static_cast<uint8_t>(c)) << 16 |
         static_cast<uint32_t>(static_cast<uint8_t>(d)) << 24;
}

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path);
  ~BinaryWriter();

  void header(uint32_t kind, uint32_t version);
  void u8(uint8_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v);
  void f64(double v);
  void str(const std::string& v);
  void f64_array(const std::vector<double>& v);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path);

  // Verifies magic and kind, returns the stored version.
  uint32_t header(uint32_t expected_kind);
  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  int64_t i64();
  double f64();
  std::string str();
  std::vector<double> f64_array();

 private:
  void need(size_t n);
  std::ifstream in_;
  std::string path_;
};

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64_file(const std::string& path);
std::string to_hex(uint64_t v);

std::string read_text_file(const std::string& path);

}  // namespace stylus

#include "stylus/serialize.hpp"

#include <array>
#include <cstring>
#include <sstream>

namespace stylus {

BinaryWriter::BinaryWriter(const std::string& path) : path_(path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) fail(ErrorCode::Io, "cannot open for writing: " + path);
}

BinaryWriter::~BinaryWriter() = default;

void BinaryWriter::header(uint32_t kind, uint32_t version) {
  u32(kContainerMagic);
  u32(kind);
  u32(version);
}

void BinaryWriter::u8(uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out_.write(b.data(), 4);
}

void BinaryWriter::u64(uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out_.write(b.data(), 8);
}

void BinaryWriter::i64(int64_t v) { u64(static_cast<uint64_t>(v)); }

void BinaryWriter::f64(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void BinaryWriter::str(const std::string& v) {
  u64(v.size());
  out_.write(v.data(), static_cast<std::streamsize>(v.size()));
}

void BinaryWriter::f64_array(const std::vector<double>& v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void BinaryWriter::close() {
  out_.flush();
  if (!out_) fail(ErrorCode::Io, "write failed: " + path_);
  out_.close();
}

BinaryReader::BinaryReader(const std::string& path) : path_(path) {
  in_.open(path, std::ios::binary);
  if (!in_) fail(ErrorCode::Io, "cannot open: " + path);
}

void BinaryReader::need(size_t n) {
  if (!in_ || in_.eof())
    fail(ErrorCode::MalformedRecord, "truncated file: " + path_ + " (wanted " + std::to_string(n) + " bytes)");
}

uint32_t BinaryReader::header(uint32_t expected_kind) {
  if (u32() != kContainerMagic) fail(ErrorCode::MalformedRecord, "bad magic in " + path_);
  uint32_t kind = u32();
  if (kind != expected_kind) fail(ErrorCode::MalformedRecord, "wrong file kind in " + path_);
  return u32();
}

uint8_t BinaryReader::u8() {
  int c = in_.get();
  if (c == EOF) need(1);
  return static_cast<uint8_t>(c);
}

uint32_t BinaryReader::u32() {
  std::array<char, 4> b;
  in_.read(b.data(), 4);
  if (in_.gcount() != 4) need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(b[i])) << (8 * i);
  return v;
}

uint64_t BinaryReader::u64() {
  std::array<char, 8> b;
  in_.read(b.data(), 8);
  if (in_.gcount() != 8) need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(b[i])) << (8 * i);
  return v;
}

int64_t BinaryReader::i64() { return static_cast<int64_t>(u64()); }

double BinaryReader::f64() {
  uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string BinaryReader::str() {
  uint64_t n = u64();
  std::string s(n, '\0');
  in_.read(s.data(), static_cast<std::streamsize>(n));
  if (static_cast<uint64_t>(in_.gcount()) != n) need(n);
  return s;
}

std::vector<double> BinaryReader::f64_array() {
  uint64_t n = u64();
  std::vector<double> v(n);
  for (uint64_t i = 0; i < n; ++i) v[i] = f64();
  return v;
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  uint64_t h = seed;
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stylus

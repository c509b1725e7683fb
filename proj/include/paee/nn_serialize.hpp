#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "paee/error.hpp"
#include "paee/nn.hpp"
#include "paee/sequencing.hpp"

namespace paee {

// Little-endian binary model container. Round trips are bit-exact.

struct SavedModel {
  HybridModel model;
  SequenceSpec spec;
  NormBundle norm;
  uint64_t seed = 0;
  std::string lineage;  // free-form provenance (fold subject, seed derivation)
};

namespace detail {

constexpr char kModelMagic[8] = {'P', 'A', 'E', 'E', 'M', 'D', 'L', '1'};
constexpr uint32_t kModelVersion = 1;

struct ByteWriter {
  std::string buf;

  void u8(uint8_t v) { buf.push_back((char)v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((char)((v >> (8 * i)) & 0xff));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back((char)((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    u32((uint32_t)s.size());
    buf += s;
  }
  void mat(const Matrix& m) {
    u32((uint32_t)m.rows());
    u32((uint32_t)m.cols());
    for (size_t i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void stats(const NormStats& s) {
    u32((uint32_t)s.channels());
    for (double v : s.mean) f64(v);
    for (double v : s.std) f64(v);
  }
};

struct ByteReader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) {
    if (pos + n > buf.size()) throw FormatError("truncated model file");
  }
  uint8_t u8() {
    need(1);
    return (uint8_t)buf[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= (uint32_t)(uint8_t)buf[pos++] << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= (uint64_t)(uint8_t)buf[pos++] << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  void mat(Matrix& m) {
    const uint32_t rows = u32(), cols = u32();
    if (m.rows() != rows || m.cols() != cols) throw FormatError("parameter shape mismatch");
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = f64();
  }
  NormStats stats() {
    const uint32_t n = u32();
    NormStats s;
    s.mean.resize(n);
    s.std.resize(n);
    for (auto& v : s.mean) v = f64();
    for (auto& v : s.std) v = f64();
    return s;
  }
};

}  // namespace detail

inline void save_model(const std::string& path, const SavedModel& sm) {
  detail::ByteWriter w;
  w.buf.append(detail::kModelMagic, sizeof detail::kModelMagic);
  w.u32(detail::kModelVersion);
  w.u64(sm.seed);
  w.str(sm.lineage);

  const ModelConfig& c = sm.model.cfg;
  w.u32((uint32_t)c.input_dim);
  w.u32((uint32_t)c.static_dim);
  for (size_t h : c.hidden) w.u32((uint32_t)h);
  w.u32((uint32_t)c.static_hidden);
  for (size_t h : c.head_hidden) w.u32((uint32_t)h);
  w.f64(c.dropout_p);

  w.u64(sm.spec.seq_size);
  w.f64(sm.spec.window_sec);
  w.u32((uint32_t)sm.spec.agg);
  w.u8(sm.spec.use_static);
  w.u8(sm.spec.use_labels);

  w.stats(sm.norm.accel);
  w.stats(sm.norm.stat);
  w.stats(sm.norm.target);

  uint32_t n_mats = 0;
  visit_params(sm.model, [&](const Matrix&) { ++n_mats; });
  w.u32(n_mats);
  visit_params(sm.model, [&](const Matrix& m) { w.mat(m); });

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot write " + path);
  const size_t written = std::fwrite(w.buf.data(), 1, w.buf.size(), f);
  std::fclose(f);
  if (written != w.buf.size()) throw IoError("short write to " + path);
}

inline SavedModel load_model(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path);
  std::string buf;
  char chunk[65536];
  size_t n;
  while ((n = std::fread(chunk, 1, sizeof chunk, f)) > 0) buf.append(chunk, n);
  std::fclose(f);

  detail::ByteReader r{buf};
  r.need(sizeof detail::kModelMagic);
  if (std::memcmp(buf.data(), detail::kModelMagic, sizeof detail::kModelMagic) != 0) {
    throw FormatError(path + " is not a model file");
  }
  r.pos = sizeof detail::kModelMagic;
  const uint32_t version = r.u32();
  if (version != detail::kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }

  SavedModel sm;
  sm.seed = r.u64();
  sm.lineage = r.str();

  ModelConfig c;
  c.input_dim = r.u32();
  c.static_dim = r.u32();
  for (auto& h : c.hidden) h = r.u32();
  c.static_hidden = r.u32();
  for (auto& h : c.head_hidden) h = r.u32();
  c.dropout_p = r.f64();

  sm.spec.seq_size = r.u64();
  sm.spec.window_sec = r.f64();
  sm.spec.agg = (AggregationFn)r.u32();
  sm.spec.use_static = r.u8() != 0;
  sm.spec.use_labels = r.u8() != 0;
  sm.spec.sr = derive_sr((double)sm.spec.seq_size, sm.spec.window_sec);

  sm.norm.accel = r.stats();
  sm.norm.stat = r.stats();
  sm.norm.target = r.stats();

  sm.model = model_sized(c);
  const uint32_t n_mats = r.u32();
  uint32_t expected = 0;
  visit_params(sm.model, [&](const Matrix&) { ++expected; });
  if (n_mats != expected) throw FormatError("parameter block count mismatch");
  visit_params(sm.model, [&](Matrix& m) { r.mat(m); });
  if (r.pos != buf.size()) throw FormatError("trailing bytes in model file");
  return sm;
}

}  // namespace paee

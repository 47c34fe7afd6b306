#pragma once

// Binary files for models, calibration sets and datasets, a key=value run
// config, and CSV output. All multi-byte values are little-endian IEEE-754;
// files are written to a temporary name and renamed into place.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icad/conformal.hpp"
#include "icad/episodes.hpp"
#include "icad/error.hpp"
#include "icad/models.hpp"
#include "icad/neural.hpp"
#include "icad/nonconformity.hpp"

namespace icad::io {

inline constexpr std::string_view kModelMagic = "ICADMDL1";
inline constexpr std::string_view kCalibrationMagic = "ICADCAL1";
inline constexpr std::string_view kDatasetMagic = "ICADDAT1";
inline constexpr std::uint32_t kModelVersion = 1;

enum class ModelKind : std::uint8_t { vae = 1, svdd = 2 };

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  /// Narrows to float32; values that do not survive the narrowing are rejected.
  void f32_from(double v, const char* what) {
    const auto f = static_cast<float>(v);
    require(std::isfinite(f), Errc::non_finite, std::string(what) + " is not representable as float32");
    f32(f);
  }

  const Bytes& bytes() const noexcept { return buf_; }
  Bytes take() noexcept { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  void magic(std::string_view expected) {
    need(expected.size(), "magic");
    const bool ok = std::memcmp(data_.data() + pos_, expected.data(), expected.size()) == 0;
    require(ok, Errc::bad_magic, "expected magic " + std::string(expected));
    pos_ += expected.size();
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return data_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  /// Checks up front that `count` items of `width` bytes are present.
  void need_items(std::uint64_t count, std::size_t width, const char* what) {
    const std::uint64_t left = data_.size() - pos_;
    require(width == 0 || count <= left / width, Errc::truncated,
            std::string(what) + ": payload shorter than declared");
  }

  void finish() const {
    require(pos_ == data_.size(), Errc::trailing_data,
            std::to_string(data_.size() - pos_) + " unexpected bytes after payload");
  }

 private:
  void need(std::size_t n, const char* what) const {
    require(data_.size() - pos_ >= n, Errc::truncated, std::string("file ends inside ") + what);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Files

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io_error, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), Errc::io_error, "read failed for " + path.string());
  return data;
}

/// Writes to "<path>.tmp" and renames, so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    require(static_cast<bool>(out), Errc::io_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::io_error, "cannot rename into " + path.string());
  }
}

inline void atomic_write(const std::filesystem::path& path, std::string_view text) {
  atomic_write(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Models

namespace detail {

inline std::uint32_t checked_u32(std::size_t v, const char* what) {
  require(v <= std::numeric_limits<std::uint32_t>::max(), Errc::invalid_argument,
          std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

inline void write_architecture(ByteWriter& w, const nn::Mlp& net) {
  require(!net.layers().empty(), Errc::invalid_model, "cannot save a network with no layers");
  w.u32(checked_u32(net.layers().size(), "layer count"));
  for (const auto& l : net.layers()) {
    require(l.in_dim() > 0 && l.out_dim() > 0, Errc::invalid_model, "cannot save an empty layer");
    w.u32(checked_u32(l.in_dim(), "layer input size"));
    w.u32(checked_u32(l.out_dim(), "layer output size"));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u8(l.bias ? 1 : 0);
  }
}

inline void write_payload(ByteWriter& w, const nn::Mlp& net) {
  for (const auto& l : net.layers()) {
    for (double v : l.weights.values()) w.f32_from(v, "weight");
    if (l.bias)
      for (double v : *l.bias) w.f32_from(v, "bias");
  }
}

struct LayerShape {
  std::size_t in = 0, out = 0;
  nn::Activation activation = nn::Activation::identity;
  bool bias = false;
};

inline std::vector<LayerShape> read_architecture(ByteReader& r) {
  const std::uint32_t count = r.u32("layer count");
  require(count >= 1, Errc::invalid_model, "network with no layers");
  r.need_items(count, 10, "architecture");
  std::vector<LayerShape> shapes(count);
  for (auto& s : shapes) {
    s.in = r.u32("layer input size");
    s.out = r.u32("layer output size");
    const std::uint8_t act = r.u8("activation code");
    require(act <= static_cast<std::uint8_t>(nn::Activation::sigmoid), Errc::invalid_model,
            "unknown activation code " + std::to_string(act));
    s.activation = static_cast<nn::Activation>(act);
    const std::uint8_t bias = r.u8("bias flag");
    require(bias <= 1, Errc::invalid_model, "bias flag must be 0 or 1");
    s.bias = bias == 1;
    require(s.in > 0 && s.out > 0, Errc::invalid_model, "layer with zero size");
  }
  return shapes;
}

inline void require_finite_layers(const std::vector<nn::DenseLayer>& layers) {
  for (const auto& l : layers) {
    require_finite(l.weights.values(), "stored weights");
    if (l.bias) require_finite(*l.bias, "stored bias");
  }
}

inline nn::Mlp read_payload(ByteReader& r, const std::vector<LayerShape>& shapes) {
  std::vector<nn::DenseLayer> layers;
  for (const auto& s : shapes) {
    r.need_items(static_cast<std::uint64_t>(s.in) * s.out, 4, "weights");
    nn::DenseLayer l{nn::Matrix(s.out, s.in), std::nullopt, s.activation};
    for (double& v : l.weights.values()) v = r.f32("weights");
    if (s.bias) {
      nn::Vector b(s.out);
      for (double& v : b) v = r.f32("bias");
      l.bias = std::move(b);
    }
    layers.push_back(std::move(l));
  }
  require_finite_layers(layers);
  return nn::Mlp(std::move(layers));
}

}  // namespace detail

inline Bytes encode_model(const VaeModel& m) {
  ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(ModelKind::vae));
  w.u32(detail::checked_u32(m.latent_dim(), "latent dimension"));
  detail::write_architecture(w, m.encoder());
  detail::write_architecture(w, m.decoder());
  detail::write_payload(w, m.encoder());
  detail::write_payload(w, m.decoder());
  return w.take();
}

/// The center is kept at full precision; it is a statistic, not a trained weight.
inline Bytes encode_model(const SvddModel& m) {
  ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(ModelKind::svdd));
  w.f64(m.weight_decay());
  w.u8(m.has_center() ? 1 : 0);
  if (m.has_center()) {
    w.u32(detail::checked_u32(m.center().size(), "center dimension"));
    for (double c : m.center()) w.f64(c);
  }
  detail::write_architecture(w, m.mapper());
  detail::write_payload(w, m.mapper());
  return w.take();
}

/// Architecture-level check used when a bare network is saved.
inline Bytes encode_network(const nn::Mlp& net) {
  ByteWriter w;
  detail::write_architecture(w, net);
  detail::write_payload(w, net);
  return w.take();
}

using Model = std::variant<VaeModel, SvddModel>;

inline Model decode_model(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  r.magic(kModelMagic);
  const std::uint32_t version = r.u32("version");
  require(version == kModelVersion, Errc::version_mismatch,
          "model format version " + std::to_string(version) + ", expected " + std::to_string(kModelVersion));
  const std::uint8_t kind = r.u8("model kind");
  if (kind == static_cast<std::uint8_t>(ModelKind::vae)) {
    const std::uint32_t latent = r.u32("latent dimension");
    const auto enc_shape = detail::read_architecture(r);
    const auto dec_shape = detail::read_architecture(r);
    auto enc = detail::read_payload(r, enc_shape);
    auto dec = detail::read_payload(r, dec_shape);
    r.finish();
    return VaeModel(std::move(enc), std::move(dec), latent);
  }
  require(kind == static_cast<std::uint8_t>(ModelKind::svdd), Errc::invalid_model,
          "unknown model kind " + std::to_string(kind));
  const double lambda = r.f64("weight decay");
  const std::uint8_t has_center = r.u8("center flag");
  require(has_center <= 1, Errc::invalid_model, "center flag must be 0 or 1");
  std::optional<nn::Vector> center;
  if (has_center) {
    const std::uint32_t dim = r.u32("center dimension");
    r.need_items(dim, 8, "center");
    nn::Vector c(dim);
    for (double& v : c) v = r.f64("center");
    center = std::move(c);
  }
  const auto shape = detail::read_architecture(r);
  auto mapper = detail::read_payload(r, shape);
  r.finish();
  return SvddModel(std::move(mapper), lambda, std::move(center));
}

inline void save_model(const std::filesystem::path& path, const VaeModel& m) { atomic_write(path, encode_model(m)); }
inline void save_model(const std::filesystem::path& path, const SvddModel& m) { atomic_write(path, encode_model(m)); }
inline Model load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

inline VaeModel load_vae(const std::filesystem::path& path) {
  auto m = load_model(path);
  require(std::holds_alternative<VaeModel>(m), Errc::invalid_model, path.string() + " is not a VAE model");
  return std::get<VaeModel>(std::move(m));
}

inline SvddModel load_svdd(const std::filesystem::path& path) {
  auto m = load_model(path);
  require(std::holds_alternative<SvddModel>(m), Errc::invalid_model, path.string() + " is not an SVDD model");
  return std::get<SvddModel>(std::move(m));
}

// ---------------------------------------------------------------------------
// Calibration sets

inline Bytes encode_calibration(const CalibrationSet& cal) {
  ByteWriter w;
  w.raw(kCalibrationMagic);
  w.u8(static_cast<std::uint8_t>(cal.kind()));
  w.u64(cal.fingerprint());
  w.u32(detail::checked_u32(cal.size(), "calibration count"));
  for (double s : cal.scores()) w.f64(s);
  return w.take();
}

inline CalibrationSet decode_calibration(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  r.magic(kCalibrationMagic);
  const std::uint8_t kind = r.u8("scorer kind");
  require(kind >= 1 && kind <= 4, Errc::invalid_argument, "unknown scorer kind " + std::to_string(kind));
  const std::uint64_t fp = r.u64("fingerprint");
  const std::uint32_t count = r.u32("count");
  r.need_items(count, 8, "scores");
  std::vector<double> scores(count);
  for (double& s : scores) s = r.f64("scores");
  r.finish();
  return CalibrationSet(std::move(scores), fp, static_cast<ScorerKind>(kind));
}

inline void save_calibration(const std::filesystem::path& path, const CalibrationSet& cal) {
  atomic_write(path, encode_calibration(cal));
}

inline CalibrationSet load_calibration(const std::filesystem::path& path) {
  return decode_calibration(read_file(path));
}

/// Loads and checks that the scores were produced by `scorer`.
inline CalibrationSet load_calibration(const std::filesystem::path& path, const Scorer& scorer) {
  auto cal = load_calibration(path);
  require(cal.kind() == scorer.kind(), Errc::fingerprint_mismatch,
          std::string("calibration was made with a ") + scorer_kind_name(cal.kind()) + " scorer, not " +
              scorer_kind_name(scorer.kind()));
  require(cal.fingerprint() == scorer.fingerprint(), Errc::fingerprint_mismatch,
          "calibration " + path.string() + " belongs to a different model");
  return cal;
}

// ---------------------------------------------------------------------------
// Datasets

/// Examples are stored as float32; r values, when present, as float64.
inline Bytes encode_dataset(std::span<const Example> examples, std::span<const double> r = {}) {
  require(r.empty() || r.size() == examples.size(), Errc::dimension_mismatch, "one r value per example");
  const std::size_t dim = examples.empty() ? 0 : examples.front().size();
  ByteWriter w;
  w.raw(kDatasetMagic);
  w.u32(detail::checked_u32(examples.size(), "example count"));
  w.u32(detail::checked_u32(dim, "dimension"));
  w.u8(r.empty() ? 0 : 1);
  for (const auto& z : examples) {
    require(z.size() == dim, Errc::dimension_mismatch, "examples have different lengths");
    for (double v : z) w.f32_from(v, "example value");
  }
  for (double v : r) w.f64(v);
  return w.take();
}

inline Bytes encode_dataset(const LabeledDataset& d) { return encode_dataset(d.examples, d.r); }

inline LabeledDataset decode_dataset(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  r.magic(kDatasetMagic);
  const std::uint32_t count = r.u32("count");
  const std::uint32_t dim = r.u32("dimension");
  const std::uint8_t has_r = r.u8("r flag");
  require(has_r <= 1, Errc::invalid_argument, "r flag must be 0 or 1");
  r.need_items(static_cast<std::uint64_t>(count) * dim, 4, "examples");
  LabeledDataset out;
  out.examples.assign(count, Example(dim));
  for (auto& z : out.examples)
    for (double& v : z) v = r.f32("examples");
  if (has_r) {
    r.need_items(count, 8, "r values");
    out.r.resize(count);
    for (double& v : out.r) v = r.f64("r values");
  }
  r.finish();
  return out;
}

inline void save_dataset(const std::filesystem::path& path, const LabeledDataset& d) {
  atomic_write(path, encode_dataset(d));
}

inline LabeledDataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

// ---------------------------------------------------------------------------
// key=value config

/// Plain text, one `key=value` per line; '#' starts a comment. Keys are kept
/// sorted so the written form is canonical.
class Config {
 public:
  static Config parse(std::string_view text) {
    Config c;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      ++line_no;
      start = end + 1;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string_view::npos, Errc::invalid_argument,
              "config line " + std::to_string(line_no) + " has no '='");
      const auto key = trim(line.substr(0, eq));
      require(!key.empty(), Errc::invalid_argument, "config line " + std::to_string(line_no) + " has an empty key");
      c.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void set(const std::string& key, double value) { values_[key] = format_number(value); }
  void set(const std::string& key, std::uint64_t value) { values_[key] = std::to_string(value); }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<double>(key, it->second);
  }
  std::uint64_t get(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  bool operator==(const Config&) const = default;

  /// Shortest decimal that round-trips.
  static std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  }

  template <typename T>
  static T parse_number(const std::string& key, const std::string& s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size(), Errc::invalid_argument,
            "config value for '" + key + "' is not a number: " + s);
    return v;
  }

  std::map<std::string, std::string> values_;
};

inline Config load_config(const std::filesystem::path& path) {
  const auto data = read_file(path);
  return Config::parse(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

inline void save_config(const std::filesystem::path& path, const Config& c) { atomic_write(path, c.to_text()); }

// ---------------------------------------------------------------------------
// CSV

/// Rows are built in memory and written atomically. Doubles use the shortest
/// round-trip representation, so identical values give identical text.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_of(header); }

  CsvWriter& cell(const std::string& s) {
    line_.push_back(s);
    return *this;
  }
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  CsvWriter& cell(double v) { return cell(Config::format_number(v)); }
  CsvWriter& cell(std::uint64_t v) { return cell(std::to_string(v)); }
  CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
  CsvWriter& cell(int v) { return cell(std::to_string(v)); }
  CsvWriter& cell(std::uint32_t v) { return cell(std::to_string(v)); }
  CsvWriter& cell(bool v) { return cell(v ? "1" : "0"); }
  CsvWriter& blank() { return cell(std::string()); }

  void end_row() {
    require(line_.size() == columns_, Errc::invalid_argument,
            "CSV row has " + std::to_string(line_.size()) + " cells, expected " + std::to_string(columns_));
    row_of(line_);
    line_.clear();
  }

  const std::string& text() const noexcept { return text_; }
  void save(const std::filesystem::path& path) const { atomic_write(path, text_); }

 private:
  void row_of(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::vector<std::string> line_;
  std::string text_;
};

}  // namespace icad::io

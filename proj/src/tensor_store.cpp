#include "histostack/tensor_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <set>

#include "histostack/hashing.hpp"

namespace histostack {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are written in host order; big-endian hosts are unsupported");

namespace {

constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

std::string_view npy_descr(DType dtype) {
  switch (dtype) {
    case DType::kUInt8: return "|u1";
    case DType::kFloat32: return "<f4";
    case DType::kInt64: return "<i8";
  }
  return "";
}

std::optional<DType> dtype_from_descr(std::string_view descr) {
  if (descr == "|u1" || descr == "u1" || descr == "<u1") return DType::kUInt8;
  if (descr == "<f4") return DType::kFloat32;
  if (descr == "<i8") return DType::kInt64;
  return std::nullopt;
}

std::size_t checked_product(const Tensor::Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      fail(ErrorCode::kFormatError, "shape product overflows");
    }
    n *= d;
  }
  return n;
}

Tensor::Storage make_storage(DType dtype, std::size_t n) {
  switch (dtype) {
    case DType::kUInt8: return std::vector<std::uint8_t>(n);
    case DType::kFloat32: return std::vector<float>(n);
    case DType::kInt64: return std::vector<std::int64_t>(n);
  }
  return std::vector<float>(n);
}

// Minimal parser for the Python dict literal numpy writes into the header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Header {
    std::string descr;
    bool fortran_order = false;
    Tensor::Shape shape;
  };

  Header parse() {
    Header h;
    bool have_descr = false, have_order = false, have_shape = false;
    expect('{');
    skip_ws();
    while (peek() != '}') {
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        h.descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = parse_bool();
        have_order = true;
      } else if (key == "shape") {
        h.shape = parse_tuple();
        have_shape = true;
      } else {
        bad("unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != '}') {
        bad("expected ',' or '}'");
      }
    }
    ++pos_;
    skip_ws();
    if (pos_ != text_.size()) bad("trailing characters after header dict");
    if (!have_descr || !have_order || !have_shape) bad("header is missing a required key");
    return h;
  }

 private:
  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorCode::kFormatError, "npy header: " + what);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) bad(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') bad("expected quoted string");
    ++pos_;
    const auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) bad("unterminated string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    skip_ws();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    bad("expected True or False");
  }

  Tensor::Shape parse_tuple() {
    Tensor::Shape shape;
    expect('(');
    skip_ws();
    while (peek() != ')') {
      if (peek() < '0' || peek() > '9') bad("expected non-negative integer extent");
      std::size_t v = 0;
      while (peek() >= '0' && peek() <= '9') {
        const std::size_t digit = static_cast<std::size_t>(peek() - '0');
        if (v > (std::numeric_limits<std::size_t>::max() - digit) / 10) bad("extent overflows");
        v = v * 10 + digit;
        ++pos_;
      }
      if (peek() == 'L') ++pos_;
      shape.push_back(v);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != ')') {
        bad("expected ',' or ')'");
      }
    }
    ++pos_;
    return shape;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string shape_literal(const Tensor::Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  s += ")";
  return s;
}

}  // namespace

std::string_view dtype_name(DType dtype) {
  switch (dtype) {
    case DType::kUInt8: return "uint8";
    case DType::kFloat32: return "float32";
    case DType::kInt64: return "int64";
  }
  return "?";
}

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kUInt8: return 1;
    case DType::kFloat32: return 4;
    case DType::kInt64: return 8;
  }
  return 0;
}

Tensor::Tensor(DType dtype, Shape shape)
    : shape_(std::move(shape)), data_(make_storage(dtype, checked_product(shape_))) {}

Tensor::Tensor(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, data_);
  if (checked_product(shape_) != n) {
    fail(ErrorCode::kShapeError, "shape does not match element count");
  }
}

std::size_t Tensor::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

bool Tensor::operator==(const Tensor& other) const {
  if (dtype() != other.dtype() || shape_ != other.shape_) return false;
  return std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const auto& w = std::get<V>(other.data_);
        return v.empty() || std::memcmp(v.data(), w.data(), v.size() * sizeof(v[0])) == 0;
      },
      data_);
}

void Tensor::check_dtype(DType want) const {
  if (dtype() != want) {
    fail(ErrorCode::kShapeError, "tensor holds " + std::string(dtype_name(dtype())) +
                                     ", requested " + std::string(dtype_name(want)));
  }
}

std::vector<std::uint8_t> encode_npy(const Tensor& tensor) {
  std::string header = "{'descr': '" + std::string(npy_descr(tensor.dtype())) +
                       "', 'fortran_order': False, 'shape': " + shape_literal(tensor.shape()) +
                       ", }";
  // Magic(6) + version(2) + length(2) + header + '\n' padded to 64 bytes.
  const std::size_t unpadded = 10 + header.size() + 1;
  const std::size_t padding = (64 - unpadded % 64) % 64;
  header.append(padding, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) fail(ErrorCode::kShapeError, "npy header too long for v1.0");

  std::vector<std::uint8_t> out;
  out.reserve(10 + header.size() + tensor.byte_size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xFF));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  std::visit(
      [&](const auto& v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
        out.insert(out.end(), p, p + v.size() * sizeof(v[0]));
      },
      tensor.storage());
  return out;
}

Tensor decode_npy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    fail(ErrorCode::kFormatError, "missing NPY magic");
  }
  const std::uint8_t major = bytes[6];
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
    offset = 10;
  } else if (major == 2) {
    if (bytes.size() < 12) fail(ErrorCode::kFormatError, "truncated v2 preamble");
    header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8) |
                 (static_cast<std::size_t>(bytes[10]) << 16) |
                 (static_cast<std::size_t>(bytes[11]) << 24);
    offset = 12;
  } else {
    fail(ErrorCode::kFormatError, "unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() - offset < header_len) fail(ErrorCode::kFormatError, "truncated header");

  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + offset), header_len);
  const auto header = HeaderParser(text).parse();
  const auto dtype = dtype_from_descr(header.descr);
  if (!dtype) fail(ErrorCode::kUnsupportedDtype, "descr '" + header.descr + "'");
  if (header.fortran_order) fail(ErrorCode::kUnsupportedLayout, "fortran_order arrays");

  const std::size_t count = checked_product(header.shape);
  const std::size_t payload = bytes.size() - offset - header_len;
  if (count > payload / dtype_size(*dtype) || count * dtype_size(*dtype) != payload) {
    fail(ErrorCode::kFormatError, "payload is " + std::to_string(payload) + " bytes, header implies " +
                                      std::to_string(count) + " elements");
  }
  auto storage = make_storage(*dtype, count);
  std::visit(
      [&](auto& v) {
        if (count > 0) std::memcpy(v.data(), bytes.data() + offset + header_len, payload);
      },
      storage);
  return Tensor(header.shape, std::move(storage));
}

void write_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_npy(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIoError, "read failed: " + path.string());
  return decode_npy(bytes);
}

const Tensor& DatasetBundle::labels(Split split) const {
  switch (split) {
    case Split::kTrain: return y_train;
    case Split::kVal: return y_val;
    case Split::kTest: return y_test;
  }
  return y_train;
}

const Tensor& DatasetBundle::images(Split split) const {
  switch (split) {
    case Split::kTrain: return x_train;
    case Split::kVal: return x_val;
    case Split::kTest: return x_test;
  }
  return x_train;
}

void validate_bundle(const DatasetBundle& b) {
  if (b.class_names.empty()) fail(ErrorCode::kBundleInvalid, "no class names");
  std::set<std::string> seen;
  for (const auto& name : b.class_names) {
    if (name.empty()) fail(ErrorCode::kBundleInvalid, "empty class name");
    if (!seen.insert(name).second) fail(ErrorCode::kBundleInvalid, "duplicate class name " + name);
  }
  const auto k = static_cast<std::int64_t>(b.class_names.size());
  for (Split s : kAllSplits) {
    const Tensor& x = b.images(s);
    const Tensor& y = b.labels(s);
    const std::string where(split_name(s));
    if (y.dtype() != DType::kInt64 || y.rank() != 1) {
      fail(ErrorCode::kBundleInvalid, "y_" + where + " must be a 1-d int64 tensor");
    }
    if (x.rank() == 0 || x.extent(0) != y.extent(0)) {
      fail(ErrorCode::kBundleInvalid, "x_" + where + " leading extent does not match y_" + where);
    }
    for (auto label : y.values<std::int64_t>()) {
      if (label < 0 || label >= k) {
        fail(ErrorCode::kBundleInvalid, "label " + std::to_string(label) + " in y_" + where +
                                            " outside [0, " + std::to_string(k) + ")");
      }
    }
  }
}

DatasetBundle load_bundle(const std::filesystem::path& manifest_path) {
  DatasetBundle b;
  b.manifest = read_manifest(manifest_path);
  b.manifest_path = manifest_path;
  b.manifest_hash = sha256_file(manifest_path);
  b.class_names = b.manifest.class_names;
  const auto dir = manifest_path.parent_path();
  auto load = [&](const std::string& role) {
    auto it = b.manifest.tensors.find(role);
    if (it == b.manifest.tensors.end()) {
      fail(ErrorCode::kBundleInvalid, "manifest does not reference " + role);
    }
    return read_tensor(dir / it->second);
  };
  b.x_train = load("x_train");
  b.y_train = load("y_train");
  b.x_val = load("x_val");
  b.y_val = load("y_val");
  b.x_test = load("x_test");
  b.y_test = load("y_test");
  validate_bundle(b);
  return b;
}

std::string save_bundle(const std::filesystem::path& out_dir, Manifest manifest,
                        const Tensor& x_train, const Tensor& y_train, const Tensor& x_val,
                        const Tensor& y_val, const Tensor& x_test, const Tensor& y_test) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + out_dir.string());
  const std::pair<const char*, const Tensor*> parts[] = {
      {"x_train", &x_train}, {"y_train", &y_train}, {"x_val", &x_val},
      {"y_val", &y_val},     {"x_test", &x_test},   {"y_test", &y_test}};
  for (const auto& [role, tensor] : parts) {
    const std::string file = std::string(role) + ".npy";
    write_tensor(*tensor, out_dir / file);
    manifest.tensors[role] = file;
  }
  const auto path = out_dir / "manifest.json";
  write_manifest(manifest, path);
  return sha256_file(path);
}

}  // namespace histostack

#include <cstring>
#include <fstream>

#include "doctest.h"
#include "histostack/rng.hpp"
#include "histostack/tensor_store.hpp"
#include "test_support.hpp"

using namespace histostack;
using histostack::testing::TempDir;

namespace {

// numpy.save(np.array([7], dtype='<i8')), captured byte for byte.
const std::vector<std::uint8_t> kNumpyInt64Seven = [] {
  std::string header = "{'descr': '<i8', 'fortran_order': False, 'shape': (1,), }";
  header.append(117 - header.size(), ' ');
  header.push_back('\n');
  std::vector<std::uint8_t> bytes = {0x93, 'N', 'U', 'M', 'P', 'Y', 0x01, 0x00, 0x76, 0x00};
  bytes.insert(bytes.end(), header.begin(), header.end());
  for (int b : {0x07, 0, 0, 0, 0, 0, 0, 0}) bytes.push_back(static_cast<std::uint8_t>(b));
  return bytes;
}();

Tensor random_tensor(Rng& rng) {
  const auto rank = static_cast<std::size_t>(rng.below(4)) + 1;
  Tensor::Shape shape;
  for (std::size_t i = 0; i < rank; ++i) shape.push_back(static_cast<std::size_t>(rng.below(6)));
  const auto dtype = static_cast<DType>(rng.below(3));
  Tensor t(dtype, shape);
  std::visit(
      [&](auto& v) {
        auto* p = reinterpret_cast<std::uint8_t*>(v.data());
        for (std::size_t i = 0; i < v.size() * sizeof(v[0]); ++i) {
          p[i] = static_cast<std::uint8_t>(rng.next_u64());
        }
      },
      const_cast<Tensor::Storage&>(t.storage()));
  return t;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("writer output matches numpy byte for byte") {
  const auto t = Tensor::from<std::int64_t>({1}, {7});
  CHECK(encode_npy(t) == kNumpyInt64Seven);
}

TEST_CASE("externally generated int64 file decodes") {
  const auto t = decode_npy(kNumpyInt64Seven);
  CHECK(t.dtype() == DType::kInt64);
  CHECK(t.shape() == Tensor::Shape{1});
  CHECK(t.values<std::int64_t>()[0] == 7);
}

TEST_CASE("2x2 float32 has a 16 byte payload and (2, 2) shape") {
  const auto t = Tensor::from<float>({2, 2}, {1, 2, 3, 4});
  const auto bytes = encode_npy(t);
  CHECK(bytes.size() % 64 == 16);
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.find("'shape': (2, 2)") != std::string::npos);
  CHECK(text.find("'descr': '<f4'") != std::string::npos);
  CHECK(decode_npy(bytes) == t);
}

TEST_CASE("empty tensor writes a valid file with no payload") {
  TempDir dir;
  const auto t = Tensor::from<float>({0}, {});
  write_tensor(t, dir / "empty.npy");
  const auto bytes = file_bytes(dir / "empty.npy");
  CHECK(bytes.size() == 128);
  CHECK(read_tensor(dir / "empty.npy") == t);
}

TEST_CASE("image-sized uint8 tensor round-trips bit exactly") {
  TempDir dir;
  Rng rng(42);
  Tensor t(DType::kUInt8, {3, 700, 460, 3});
  for (auto& v : t.values<std::uint8_t>()) v = static_cast<std::uint8_t>(rng.next_u64());
  write_tensor(t, dir / "img.npy");
  CHECK(read_tensor(dir / "img.npy") == t);
}

TEST_CASE("round trip and repeat-write determinism on random tensors") {
  TempDir dir;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_tensor(rng);
    write_tensor(t, dir / "a.npy");
    write_tensor(t, dir / "b.npy");
    const auto a = file_bytes(dir / "a.npy");
    REQUIRE(a == file_bytes(dir / "b.npy"));
    const auto back = read_tensor(dir / "a.npy");
    REQUIRE(back == t);
    CHECK(encode_npy(back) == a);
  }
}

TEST_CASE("malformed inputs are rejected with typed errors") {
  auto good = encode_npy(Tensor::from<float>({2, 2}, {1, 2, 3, 4}));

  SUBCASE("truncated payload") {
    good.pop_back();
    CHECK_ERROR_CODE(decode_npy(good), ErrorCode::kFormatError);
  }
  SUBCASE("bad magic") {
    good[1] = 'X';
    CHECK_ERROR_CODE(decode_npy(good), ErrorCode::kFormatError);
  }
  SUBCASE("unknown version") {
    good[6] = 9;
    CHECK_ERROR_CODE(decode_npy(good), ErrorCode::kFormatError);
  }
  SUBCASE("column-major layout") {
    std::string text(good.begin(), good.end());
    text.replace(text.find("False"), 5, "True ");
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    CHECK_ERROR_CODE(decode_npy(bytes), ErrorCode::kUnsupportedLayout);
  }
  SUBCASE("unsupported dtype") {
    std::string text(good.begin(), good.end());
    text.replace(text.find("<f4"), 3, "<f8");
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    CHECK_ERROR_CODE(decode_npy(bytes), ErrorCode::kUnsupportedDtype);
  }
  SUBCASE("missing file") {
    CHECK_ERROR_CODE(read_tensor("/nonexistent/x.npy"), ErrorCode::kIoError);
  }
}

TEST_CASE("header parsing is total over prefixes and random bytes") {
  Rng rng(99);
  const auto good = encode_npy(Tensor::from<std::int64_t>({3}, {1, 2, 3}));
  int failures = 0;
  auto probe = [&](std::span<const std::uint8_t> bytes) {
    try {
      (void)decode_npy(bytes);
    } catch (const Error&) {
      ++failures;
    }
  };
  for (std::size_t len = 0; len < good.size(); ++len) probe(std::span(good).first(len));
  CHECK(failures == static_cast<int>(good.size()));
  for (int i = 0; i < 2000; ++i) {
    auto bytes = good;
    const auto flips = rng.below(4) + 1;
    for (std::uint64_t f = 0; f < flips; ++f) {
      bytes[rng.below(bytes.size())] = static_cast<std::uint8_t>(rng.next_u64());
    }
    probe(bytes);  // must not crash; either decodes or throws Error
  }
}

namespace {

Manifest small_manifest(std::size_t k) {
  Manifest m;
  for (std::size_t c = 0; c < k; ++c) m.class_names.push_back("class" + std::to_string(c));
  m.image_size = {2, 2};
  return m;
}

Tensor labels_for(std::size_t n, std::size_t k) {
  std::vector<std::int64_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<std::int64_t>(i % k);
  return Tensor::from<std::int64_t>({n}, y);
}

}  // namespace

TEST_CASE("bundle with a 60/20/20 split of 100 samples loads") {
  TempDir dir;
  const auto img = [](std::size_t n) { return Tensor(DType::kUInt8, {n, 2, 2, 3}); };
  save_bundle(dir.path(), small_manifest(4), img(60), labels_for(60, 4), img(20), labels_for(20, 4),
              img(20), labels_for(20, 4));
  const auto b = load_bundle(dir / "manifest.json");
  CHECK(b.x_train.extent(0) == 60);
  CHECK(b.x_val.extent(0) == 20);
  CHECK(b.x_test.extent(0) == 20);
  CHECK(b.class_names.size() == 4);
  CHECK(b.manifest_hash.size() == 64);
}

TEST_CASE("bundle validation failures") {
  TempDir dir;
  const auto img = [](std::size_t n) { return Tensor(DType::kUInt8, {n, 1, 1, 3}); };

  SUBCASE("label equal to class count") {
    auto y = labels_for(4, 4);
    y.values<std::int64_t>()[0] = 4;
    save_bundle(dir.path(), small_manifest(4), img(4), y, img(4), labels_for(4, 4), img(4),
                labels_for(4, 4));
    CHECK_ERROR_CODE(load_bundle(dir / "manifest.json"), ErrorCode::kBundleInvalid);
  }
  SUBCASE("empty class name") {
    auto m = small_manifest(2);
    m.class_names[1] = "";
    save_bundle(dir.path(), m, img(2), labels_for(2, 2), img(2), labels_for(2, 2), img(2),
                labels_for(2, 2));
    CHECK_ERROR_CODE(load_bundle(dir / "manifest.json"), ErrorCode::kBundleInvalid);
  }
  SUBCASE("no class names") {
    save_bundle(dir.path(), small_manifest(0), img(0), labels_for(0, 1), img(0), labels_for(0, 1),
                img(0), labels_for(0, 1));
    CHECK_ERROR_CODE(load_bundle(dir / "manifest.json"), ErrorCode::kBundleInvalid);
  }
  SUBCASE("leading extent mismatch") {
    save_bundle(dir.path(), small_manifest(2), img(3), labels_for(2, 2), img(2), labels_for(2, 2),
                img(2), labels_for(2, 2));
    CHECK_ERROR_CODE(load_bundle(dir / "manifest.json"), ErrorCode::kBundleInvalid);
  }
  SUBCASE("missing tensor file") {
    save_bundle(dir.path(), small_manifest(2), img(2), labels_for(2, 2), img(2), labels_for(2, 2),
                img(2), labels_for(2, 2));
    std::filesystem::remove(dir / "x_val.npy");
    CHECK_ERROR_CODE(load_bundle(dir / "manifest.json"), ErrorCode::kIoError);
  }
}

TEST_CASE("manifest preserves unknown keys") {
  auto m = small_manifest(2);
  m.extra["operator_note"] = "kept";
  const auto back = manifest_from_json(manifest_to_json(m));
  CHECK(back.extra.at("operator_note") == "kept");
  CHECK(manifest_text(back) == manifest_text(m));
}

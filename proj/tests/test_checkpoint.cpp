#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "yatt/checkpoint.hpp"
#include "yatt/common.hpp"

using namespace yatt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "yatt_checkpoint_test";
  fs::create_directories(dir);
  return dir;
}

Checkpoint sample_checkpoint(ModelKind kind) {
  Checkpoint cp;
  cp.config.kind = kind;
  cp.config.encoder.input_dim = 3;
  cp.config.encoder.h1 = 5;
  cp.config.encoder.h2 = 4;
  cp.config.encoder.t_steps = 6;
  cp.config.encoder.dropout_rate = 0.25;
  cp.config.statics_after = 2;
  cp.config.epochs = 17;
  cp.config.batch_size = 12;
  cp.config.learning_rate = 0.0025;
  cp.seed = 123456789;
  cp.weights = build_model(cp.config, 31);
  cp.scaler.feature_names = {"ADNI", "MG"};
  cp.scaler.features = {{12.5, 300.25, false}, {0.0, 8.0, false}};
  cp.scaler.target = {20.125, 80.5, false};
  return cp;
}

std::vector<char> read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("checkpoint round trip preserves every bit") {
  for (ModelKind kind : {ModelKind::stacked, ModelKind::attention}) {
    CAPTURE(model_kind_name(kind));
    const fs::path path = temp_dir() / "model.yatt";
    const Checkpoint cp = sample_checkpoint(kind);
    save_checkpoint(path, cp);
    const Checkpoint back = load_checkpoint(path);

    CHECK(back.config.kind == cp.config.kind);
    CHECK(back.config.encoder.input_dim == cp.config.encoder.input_dim);
    CHECK(back.config.encoder.h1 == cp.config.encoder.h1);
    CHECK(back.config.encoder.h2 == cp.config.encoder.h2);
    CHECK(back.config.encoder.t_steps == cp.config.encoder.t_steps);
    CHECK(back.config.encoder.dropout_rate == cp.config.encoder.dropout_rate);
    CHECK(back.config.statics_after == cp.config.statics_after);
    CHECK(back.config.epochs == cp.config.epochs);
    CHECK(back.config.batch_size == cp.config.batch_size);
    CHECK(back.config.learning_rate == cp.config.learning_rate);
    CHECK(back.seed == cp.seed);
    CHECK(back.weights.flatten() == cp.weights.flatten());
    CHECK(back.scaler.feature_names == cp.scaler.feature_names);
    REQUIRE(back.scaler.features.size() == 2);
    CHECK(back.scaler.features[0].min == 12.5);
    CHECK(back.scaler.features[0].max == 300.25);
    CHECK(back.scaler.target.min == 20.125);
    CHECK(back.scaler.target.max == 80.5);
    CHECK_FALSE(back.scaler.target.constant);
  }
}

TEST_CASE("expected-kind gate") {
  const fs::path path = temp_dir() / "kind.yatt";
  save_checkpoint(path, sample_checkpoint(ModelKind::stacked));
  CHECK_NOTHROW(load_checkpoint(path, ModelKind::stacked));
  CHECK_THROWS_AS(load_checkpoint(path, ModelKind::attention), CheckpointKindError);
}

TEST_CASE("bad magic is a version error") {
  const fs::path path = temp_dir() / "magic.yatt";
  save_checkpoint(path, sample_checkpoint(ModelKind::stacked));
  auto bytes = read_all(path);
  bytes[4] = '9';  // YATT9
  write_all(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointVersionError);
}

TEST_CASE("truncation is reported as such") {
  const fs::path path = temp_dir() / "trunc.yatt";
  save_checkpoint(path, sample_checkpoint(ModelKind::stacked));
  auto bytes = read_all(path);
  bytes.resize(bytes.size() - 24);
  write_all(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointTruncatedError);

  // header cut mid-way counts as truncation too
  bytes.resize(60);
  write_all(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointTruncatedError);
}

TEST_CASE("payload corruption trips the checksum") {
  const fs::path path = temp_dir() / "sum.yatt";
  save_checkpoint(path, sample_checkpoint(ModelKind::attention));
  auto bytes = read_all(path);
  bytes[bytes.size() - 5] ^= 0x40;  // flip one bit deep in the payload
  write_all(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointChecksumError);
}

TEST_CASE("trailing bytes are rejected") {
  const fs::path path = temp_dir() / "trail.yatt";
  save_checkpoint(path, sample_checkpoint(ModelKind::stacked));
  auto bytes = read_all(path);
  bytes.push_back('x');
  write_all(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(load_checkpoint(temp_dir() / "does_not_exist.yatt"), IoError);
}

TEST_CASE("save refuses inconsistent weight shapes") {
  Checkpoint cp = sample_checkpoint(ModelKind::stacked);
  cp.config.encoder.h2 = 7;  // weights no longer match the config
  CHECK_THROWS_AS(save_checkpoint(temp_dir() / "bad.yatt", cp), ShapeError);
}

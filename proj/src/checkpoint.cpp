#include "yatt/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "yatt/common.hpp"

namespace yatt {

namespace {

constexpr const char* kMagic = "YATT1";

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string range_str(const Scaler::Range& r) {
  return fmt_double(r.min) + " " + fmt_double(r.max) + " " + (r.constant ? "1" : "0");
}

Scaler::Range parse_range(std::istringstream& ss, const std::string& what) {
  Scaler::Range r;
  int constant = 0;
  if (!(ss >> r.min >> r.max >> constant)) {
    throw DataError("checkpoint header: malformed " + what);
  }
  r.constant = constant != 0;
  return r;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  cp.config.validate();
  if (cp.weights.param_count() != count_params(cp.config)) {
    throw ShapeError("checkpoint weights carry " +
                     std::to_string(cp.weights.param_count()) +
                     " parameters, config expects " +
                     std::to_string(count_params(cp.config)));
  }
  if (cp.scaler.features.size() != cp.scaler.feature_names.size()) {
    throw ShapeError("scaler has " + std::to_string(cp.scaler.features.size()) +
                     " ranges for " + std::to_string(cp.scaler.feature_names.size()) +
                     " names");
  }

  std::string payload;
  payload.reserve(8 * cp.weights.param_count());
  cp.weights.visit_params([&payload](const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &p[i], sizeof bits);
      put_u64_le(payload, bits);
    }
  });

  std::ostringstream header;
  header << kMagic << '\n';
  header << "kind = " << model_kind_name(cp.config.kind) << '\n';
  header << "input_dim = " << cp.config.encoder.input_dim << '\n';
  header << "h1 = " << cp.config.encoder.h1 << '\n';
  header << "h2 = " << cp.config.encoder.h2 << '\n';
  header << "dropout = " << fmt_double(cp.config.encoder.dropout_rate) << '\n';
  header << "t_steps = " << cp.config.encoder.t_steps << '\n';
  header << "statics_after = " << cp.config.statics_after << '\n';
  header << "epochs = " << cp.config.epochs << '\n';
  header << "batch_size = " << cp.config.batch_size << '\n';
  header << "learning_rate = " << fmt_double(cp.config.learning_rate) << '\n';
  header << "grad_clip = " << fmt_double(cp.config.grad_clip) << '\n';
  header << "seed = " << cp.seed << '\n';
  for (std::size_t i = 0; i < cp.scaler.features.size(); ++i) {
    header << "scaler_feature = " << cp.scaler.feature_names[i] << ' '
           << range_str(cp.scaler.features[i]) << '\n';
  }
  header << "scaler_target = " << range_str(cp.scaler.target) << '\n';
  header << "param_count = " << cp.weights.param_count() << '\n';
  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload.data(), payload.size())));
  header << "checksum = " << checksum << '\n';
  header << "end_header\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header.str();
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expect_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw CheckpointTruncatedError(path.string() + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMagic) {
    throw CheckpointVersionError(path.string() + ": bad magic '" + line +
                                 "', expected '" + kMagic + "'");
  }

  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, std::string>> scaler_lines;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") {
      saw_end = true;
      break;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw DataError(path.string() + ": malformed header line '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "scaler_feature") {
      scaler_lines.emplace_back(key, value);
    } else if (!kv.emplace(key, value).second) {
      throw DataError(path.string() + ": duplicate header key '" + key + "'");
    }
  }
  if (!saw_end) {
    throw CheckpointTruncatedError(path.string() + ": header never terminated");
  }

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw DataError(path.string() + ": header is missing '" + key + "'");
    }
    return it->second;
  };
  auto need_num = [&](const std::string& key) -> double {
    std::istringstream ss(need(key));
    double v;
    if (!(ss >> v)) throw DataError(path.string() + ": malformed '" + key + "'");
    return v;
  };

  Checkpoint cp;
  cp.config.kind = model_kind_from_name(need("kind"));
  cp.config.encoder.input_dim = static_cast<std::size_t>(need_num("input_dim"));
  cp.config.encoder.h1 = static_cast<std::size_t>(need_num("h1"));
  cp.config.encoder.h2 = static_cast<std::size_t>(need_num("h2"));
  cp.config.encoder.dropout_rate = need_num("dropout");
  cp.config.encoder.t_steps = static_cast<std::size_t>(need_num("t_steps"));
  cp.config.statics_after = static_cast<std::size_t>(need_num("statics_after"));
  cp.config.epochs = static_cast<std::size_t>(need_num("epochs"));
  cp.config.batch_size = static_cast<std::size_t>(need_num("batch_size"));
  cp.config.learning_rate = need_num("learning_rate");
  cp.config.grad_clip = need_num("grad_clip");
  cp.seed = static_cast<std::uint64_t>(need_num("seed"));
  cp.config.validate();

  if (expect_kind && cp.config.kind != *expect_kind) {
    throw CheckpointKindError(path.string() + " holds a " +
                              model_kind_name(cp.config.kind) + " model, expected " +
                              model_kind_name(*expect_kind));
  }

  for (const auto& [key, value] : scaler_lines) {
    std::istringstream ss(value);
    std::string name;
    if (!(ss >> name)) throw DataError(path.string() + ": malformed scaler_feature");
    cp.scaler.feature_names.push_back(name);
    cp.scaler.features.push_back(parse_range(ss, "scaler_feature " + name));
  }
  {
    std::istringstream ss(need("scaler_target"));
    cp.scaler.target = parse_range(ss, "scaler_target");
  }

  const auto param_count = static_cast<std::size_t>(need_num("param_count"));
  if (param_count != count_params(cp.config)) {
    throw DataError(path.string() + ": header says " + std::to_string(param_count) +
                    " parameters, config implies " +
                    std::to_string(count_params(cp.config)));
  }

  std::string payload(8 * param_count, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw CheckpointTruncatedError(path.string() + ": payload has " +
                                   std::to_string(in.gcount()) + " bytes, expected " +
                                   std::to_string(payload.size()));
  }
  char trailing;
  if (in.read(&trailing, 1)) {
    throw DataError(path.string() + ": trailing bytes after payload");
  }

  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload.data(), payload.size())));
  if (need("checksum") != checksum) {
    throw CheckpointChecksumError(path.string() + ": payload checksum " + checksum +
                                  " does not match header " + need("checksum"));
  }

  cp.weights = build_model(cp.config, 0);
  Vec flat(param_count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < param_count; ++i) {
    const std::uint64_t bits = get_u64_le(bytes + 8 * i);
    std::memcpy(&flat[i], &bits, sizeof(double));
  }
  cp.weights.unflatten(flat);
  return cp;
}

}  // namespace yatt

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "hqfno/config.hpp"
#include "hqfno/model.hpp"

namespace hqfno::model {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'H', 'Q', 'F', 'N', 'O', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  auto u = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(in[pos + i]) << (8 * i);
  return std::bit_cast<T>(u);
}

std::string scaler_mode(mixer::ScalerMode m) {
  return m == mixer::ScalerMode::Training ? "training" : "inference";
}

}  // namespace

std::vector<std::uint8_t> save_checkpoint(ModelParams& params) {
  auto tensors = params.parameters();
  const auto bufs = params.buffers();
  json manifest;
  manifest["config"] = config::to_json(params.config);
  manifest["tensors"] = json::array();
  std::uint64_t offset = 0;
  auto describe = [&](const NamedSpan& t, const char* kind) {
    manifest["tensors"].push_back(
        {{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"kind", kind}});
    offset += t.values.size();
  };
  for (const auto& t : tensors) describe(t, "parameter");
  for (const auto& t : bufs) describe(t, "buffer");
  manifest["scalers"] = json::array();
  for (const auto& l : params.layers) {
    manifest["scalers"].push_back({{"initialized", l.scaler.initialized},
                                   {"momentum", l.scaler.momentum},
                                   {"epsilon", l.scaler.epsilon},
                                   {"mode", scaler_mode(l.scaler.mode)}});
  }
  manifest["payload_doubles"] = offset;
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset * 8);
  for (const auto& t : tensors) {
    for (double v : t.values) put_le<double>(out, v);
  }
  for (const auto& t : bufs) {
    for (double v : t.values) put_le<double>(out, v);
  }
  return out;
}

ModelParams load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw LoadError("not a checkpoint (bad magic or truncated header)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 8);
  if (version != kVersion) {
    throw LoadError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const auto mlen = get_le<std::uint64_t>(bytes, 12);
  if (20 + mlen > bytes.size()) throw LoadError("truncated checkpoint manifest");
  json manifest;
  ModelParams params;
  try {
    manifest = json::parse(bytes.begin() + 20, bytes.begin() + 20 + static_cast<std::ptrdiff_t>(mlen));
    params = ModelParams::zeros(config::model_config_from_json(manifest.at("config")));
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed checkpoint manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(std::string("invalid config in checkpoint: ") + e.what());
  }

  std::map<std::string, json> entries;
  for (const auto& t : manifest.at("tensors")) entries[t.at("name").get<std::string>()] = t;
  const std::size_t payload = 20 + mlen;
  const std::size_t available = (bytes.size() - payload) / 8;

  auto fill = [&](const NamedSpan& t) {
    const auto it = entries.find(t.name);
    if (it == entries.end()) throw LoadError("checkpoint lacks tensor '" + t.name + "'");
    const auto shape = it->second.at("shape").get<std::vector<std::size_t>>();
    if (shape != t.shape) {
      throw LoadError("shape mismatch for '" + t.name + "': stored " + shape_string(shape) +
                      ", config implies " + shape_string(t.shape));
    }
    const auto off = it->second.at("offset").get<std::size_t>();
    if (off + t.values.size() > available) throw LoadError("truncated checkpoint payload");
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      t.values[i] = get_le<double>(bytes, payload + 8 * (off + i));
    }
    entries.erase(it);
  };
  for (const auto& t : params.parameters()) fill(t);
  for (const auto& t : params.buffers()) fill(t);
  if (!entries.empty()) {
    throw LoadError("checkpoint has tensor '" + entries.begin()->first +
                    "' that the config does not define");
  }
  const auto& scalers = manifest.at("scalers");
  if (scalers.size() != params.layers.size()) throw LoadError("scaler count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& s = params.layers[l].scaler;
    s.initialized = scalers[l].at("initialized").get<bool>();
    s.momentum = scalers[l].at("momentum").get<double>();
    s.epsilon = scalers[l].at("epsilon").get<double>();
    s.mode = scalers[l].at("mode").get<std::string>() == "training" ? mixer::ScalerMode::Training
                                                                   : mixer::ScalerMode::Inference;
  }
  return params;
}

void save_checkpoint_file(ModelParams& params, const std::string& path) {
  const auto bytes = save_checkpoint(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path);
}

ModelParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

}  // namespace hqfno::model

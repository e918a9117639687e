#include "obj2text/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "obj2text/errors.hpp"
#include "obj2text/json_io.hpp"

namespace obj2text {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'O', 'B', 'J', '2', 'T', 'E', 'X', 'T'};

template <class T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <class T>
T read_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ParseError(std::string("checkpoint: truncated ") + what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}


constexpr std::array<const char*, 3> kKinds = {"value", "adam_m", "adam_v"};

Matrix& tensor_of(Parameter& p, std::size_t kind) {
  switch (kind) {
    case 0: return p.value;
    case 1: return p.adam_m;
    default: return p.adam_v;
  }
}

json model_json(const ModelConfig& m) {
  return json{{"hidden", m.hidden},
              {"categories", m.categories},
              {"vocabulary", m.vocabulary},
              {"aux_dim", m.aux_dim},
              {"ablation", m.ablation}};
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Model& model = const_cast<Model&>(ckpt.model);
  json manifest = json::array();
  std::uint64_t offset = 0;
  for (Parameter* p : model.parameters()) {
    for (std::size_t k = 0; k < kKinds.size(); ++k) {
      const Matrix& m = tensor_of(*p, k);
      manifest.push_back(
          {{"name", p->name}, {"kind", kKinds[k]}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
      offset += m.size();
    }
  }
  json header{{"config", ckpt.config},
              {"model", model_json(model.config())},
              {"words", ckpt.words.words()},
              {"categories", ckpt.categories.names()},
              {"iteration", ckpt.iteration},
              {"rng", {{"seed", ckpt.rng.seed()}, {"counter", ckpt.rng.counter()}}},
              {"tensors", manifest}};
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, Checkpoint::kFormatVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Parameter* p : model.parameters()) {
    for (std::size_t k = 0; k < kKinds.size(); ++k) {
      for (double v : tensor_of(*p, k).data()) write_le(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  if (!out) throw StateError("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError("checkpoint: cannot open " + tmp.string() + " for writing");
    try {
      save_checkpoint(out, ckpt);
      out.close();
      if (!out) throw StateError("checkpoint: write to " + tmp.string() + " failed");
    } catch (...) {
      out.close();
      std::filesystem::remove(tmp);
      throw;
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("checkpoint: missing OBJ2TEXT signature");
  }
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != Checkpoint::kFormatVersion) {
    throw StateError("checkpoint: unsupported format version " + std::to_string(version) +
                     " (expected " + std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  const auto header_size = read_le<std::uint64_t>(in, "header length");
  if (header_size > (std::uint64_t{1} << 32)) throw ParseError("checkpoint: implausible header length");
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) {
    throw ParseError("checkpoint: truncated header");
  }

  Checkpoint ckpt;
  json tensors;
  try {
    const json header = json::parse(text);
    ckpt.config = parse_train_config(header.at("config"));
    const json& m = header.at("model");
    ModelConfig mc;
    mc.hidden = m.at("hidden").get<std::size_t>();
    mc.categories = m.at("categories").get<std::size_t>();
    mc.vocabulary = m.at("vocabulary").get<std::size_t>();
    mc.aux_dim = m.at("aux_dim").get<std::size_t>();
    mc.ablation = m.at("ablation").get<AblationFlags>();
    ckpt.words = Vocabulary(header.at("words").get<std::vector<std::string>>());
    ckpt.categories = CategoryVocabulary(header.at("categories").get<std::vector<std::string>>());
    if (ckpt.words.size() != mc.vocabulary || ckpt.categories.size() != mc.categories) {
      throw ParseError("checkpoint: vocabulary sizes disagree with the model config");
    }
    ckpt.model = Model(mc);
    ckpt.iteration = header.at("iteration").get<std::size_t>();
    ckpt.rng = Rng(header.at("rng").at("seed").get<std::uint64_t>(),
                   header.at("rng").at("counter").get<std::uint64_t>());
    tensors = header.at("tensors");
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }

  const auto params = ckpt.model.parameters();
  if (!tensors.is_array() || tensors.size() != params.size() * kKinds.size()) {
    throw ParseError("checkpoint: tensor manifest does not match the model");
  }
  std::uint64_t offset = 0;
  std::size_t entry = 0;
  for (Parameter* p : params) {
    for (std::size_t k = 0; k < kKinds.size(); ++k, ++entry) {
      Matrix& m = tensor_of(*p, k);
      const json& t = tensors[entry];
      try {
        if (t.at("name") != p->name || t.at("kind") != kKinds[k] ||
            t.at("shape").at(0).get<std::size_t>() != m.rows() ||
            t.at("shape").at(1).get<std::size_t>() != m.cols() ||
            t.at("offset").get<std::uint64_t>() != offset) {
          throw ParseError("checkpoint: manifest entry " + std::to_string(entry) + " (" +
                           p->name + "/" + kKinds[k] + ") does not match the model");
        }
      } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: malformed manifest: ") + e.what());
      }
      for (double& v : m.data()) v = std::bit_cast<double>(read_le<std::uint64_t>(in, "tensor data"));
      offset += m.size();
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("checkpoint: trailing bytes after tensor data");
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("checkpoint: cannot open " + path.string());
  try {
    return load_checkpoint(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace obj2text

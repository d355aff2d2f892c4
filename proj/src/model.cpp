#include "mlsa/model.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mlsa {

using json = nlohmann::ordered_json;

const char* cell_name(CellType c) { return c == CellType::GRU ? "gru" : "lstm"; }

CellType cell_from_name(const std::string& name) {
  if (name == "gru") return CellType::GRU;
  if (name == "lstm") return CellType::LSTM;
  throw ValidationError("unknown cell_type '" + name + "' (expected gru or lstm)");
}

void Hyperparams::validate() const {
  if (emb_dim < 1 || layers < 1 || hidden < 1 || max_len < 1)
    throw ValidationError("hyperparams: emb_dim, layers, hidden, max_len must be positive");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw ValidationError("hyperparams: dropout must be in [0,1)");
  if (num_classes != 2)
    throw ValidationError("hyperparams: num_classes must be 2");
}

int class_index(Label l) {
  switch (l) {
    case Label::Negative: return 0;
    case Label::Positive: return 1;
    case Label::Unlabeled: break;
  }
  throw ValidationError("unlabeled review where a polarity label is required");
}

namespace {

Tensor<float> glorot(std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  Tensor<float> t = Tensor<float>::zeros({fan_out, fan_in});
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
  return t;
}

} // namespace

Model init_model(const Hyperparams& hp, const EmbeddingMatrix& emb,
                 const Vocabulary& vocab, std::uint64_t seed) {
  hp.validate();
  if (emb.matrix.shape.size() != 2 ||
      emb.matrix.shape[1] != static_cast<std::size_t>(hp.emb_dim))
    throw ValidationError("init_model: embedding dim " +
                          std::to_string(emb.matrix.cols()) +
                          " does not match configured emb_dim " +
                          std::to_string(hp.emb_dim));

  Model m;
  m.hp = hp;
  m.vocab_sha256 = vocab.sha256();
  m.embedding_sha256 = emb.sha256();

  Rng rng = Rng(seed).fork("init");
  const std::size_t H = static_cast<std::size_t>(hp.hidden);
  const auto gates = detail::gate_names(hp.cell);
  for (int layer = 0; layer < hp.layers; ++layer) {
    std::size_t in_dim = layer == 0 ? static_cast<std::size_t>(hp.emb_dim) : 2 * H;
    for (const char* dir : {"fwd", "bwd"}) {
      std::string prefix = "l" + std::to_string(layer) + "." + dir + ".";
      for (const auto& gn : gates) m.params.add(prefix + "W_" + gn, glorot(H, in_dim, rng));
      for (const auto& gn : gates) m.params.add(prefix + "U_" + gn, glorot(H, H, rng));
      for (const auto& gn : gates)
        m.params.add(prefix + "b_" + gn, Tensor<float>::zeros({H}));
    }
  }
  m.params.add("out.W", glorot(static_cast<std::size_t>(hp.num_classes), 2 * H, rng));
  m.params.add("out.b", Tensor<float>::zeros({static_cast<std::size_t>(hp.num_classes)}));
  return m;
}

void verify_compat(const Model& model, const Vocabulary& vocab,
                   const EmbeddingMatrix& emb) {
  if (model.vocab_sha256 != vocab.sha256())
    throw ValidationError("vocabulary hash mismatch: model was built against " +
                          model.vocab_sha256.substr(0, 12) + "..., given " +
                          vocab.sha256().substr(0, 12) + "...");
  if (model.embedding_sha256 != emb.sha256())
    throw ValidationError("embedding hash mismatch: model was built against " +
                          model.embedding_sha256.substr(0, 12) + "..., given " +
                          emb.sha256().substr(0, 12) + "...");
}

std::vector<Prediction> predict(const Model& model, const EmbeddingMatrix& emb,
                                const std::vector<EncodedSequence>& batch,
                                bool train_mode, Rng rng) {
  ForwardPass<float> fp;
  build_forward<float>(fp, model.hp, model.params, emb.matrix, batch, train_mode,
                       rng);
  Tensor<float> probs = softmax_rows(fp.graph.val(fp.logits));
  std::vector<Prediction> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Prediction p;
    p.p_neg = static_cast<double>(probs.at(i, 0));
    p.p_pos = static_cast<double>(probs.at(i, 1));
    p.label = p.p_pos > 0.5 ? Label::Positive : Label::Negative;
    out.push_back(p);
  }
  return out;
}

// --- serialization -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'L', 'S', 'A'};
constexpr std::uint8_t kVersion = 1;

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32_le(std::string& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  put_u32_le(out, bits);
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

json hp_to_json(const Hyperparams& hp) {
  json j;
  j["emb_dim"] = hp.emb_dim;
  j["layers"] = hp.layers;
  j["hidden"] = hp.hidden;
  j["dropout"] = hp.dropout_p;
  j["max_len"] = hp.max_len;
  j["cell"] = cell_name(hp.cell);
  j["num_classes"] = hp.num_classes;
  return j;
}

Hyperparams hp_from_json(const json& j) {
  Hyperparams hp;
  hp.emb_dim = j.at("emb_dim").get<int>();
  hp.layers = j.at("layers").get<int>();
  hp.hidden = j.at("hidden").get<int>();
  hp.dropout_p = j.at("dropout").get<double>();
  hp.max_len = j.at("max_len").get<int>();
  hp.cell = cell_from_name(j.at("cell").get<std::string>());
  hp.num_classes = j.at("num_classes").get<int>();
  return hp;
}

} // namespace

void save_model(const Model& model, const std::string& path) {
  json header;
  header["hyperparams"] = hp_to_json(model.hp);
  header["vocab_sha256"] = model.vocab_sha256;
  header["embedding_sha256"] = model.embedding_sha256;

  json dir = json::array();
  std::uint64_t offset = 0;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    const Tensor<float>& t = model.params.tensors[p];
    json e;
    e["name"] = model.params.names[p];
    e["shape"] = t.shape;
    e["offset"] = offset;
    dir.push_back(e);
    offset += t.numel() * sizeof(float);
  }
  header["tensors"] = dir;

  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  blob.push_back(static_cast<char>(kVersion));
  std::string hdr = header.dump();
  put_u32_le(blob, static_cast<std::uint32_t>(hdr.size()));
  blob += hdr;
  for (const Tensor<float>& t : model.params.tensors)
    for (float v : t.data) put_f32_le(blob, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("write failed: " + path);
}

Model load_model(const std::string& path, std::optional<CellType> expected_cell) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  if (blob.size() < 9 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path + ": not a model file (bad magic)");
  std::uint8_t version = static_cast<std::uint8_t>(blob[4]);
  if (version != kVersion)
    throw ParseError(path + ": unsupported model format version " +
                     std::to_string(version));
  std::uint32_t hdr_len =
      get_u32_le(reinterpret_cast<const unsigned char*>(blob.data()) + 5);
  if (blob.size() < 9 + static_cast<std::size_t>(hdr_len))
    throw ParseError(path + ": truncated model file (header)");

  json header;
  try {
    header = json::parse(blob.substr(9, hdr_len));
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad model header: " + e.what());
  }

  Model m;
  try {
    m.hp = hp_from_json(header.at("hyperparams"));
    m.vocab_sha256 = header.at("vocab_sha256").get<std::string>();
    m.embedding_sha256 = header.at("embedding_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad model header: " + e.what());
  }
  if (expected_cell && m.hp.cell != *expected_cell)
    throw ValidationError(path + ": cell_type mismatch: file has " +
                          std::string(cell_name(m.hp.cell)) + ", run configured for " +
                          cell_name(*expected_cell));

  const std::size_t payload_start = 9 + hdr_len;
  const std::size_t payload_len = blob.size() - payload_start;
  std::uint64_t expect_offset = 0;
  for (const json& e : header.at("tensors")) {
    std::string name = e.at("name").get<std::string>();
    std::vector<std::size_t> shape = e.at("shape").get<std::vector<std::size_t>>();
    std::uint64_t offset = e.at("offset").get<std::uint64_t>();
    if (offset != expect_offset)
      throw ParseError(path + ": tensor directory inconsistent (offset of '" + name +
                       "')");
    Tensor<float> t = Tensor<float>::zeros(shape);
    std::uint64_t nbytes = t.numel() * sizeof(float);
    if (offset + nbytes > payload_len)
      throw ParseError(path + ": tensor directory inconsistent with payload length");
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(blob.data() + payload_start + offset);
    for (std::size_t i = 0; i < t.numel(); ++i)
      t.data[i] = std::bit_cast<float>(get_u32_le(p + i * 4));
    m.params.add(std::move(name), std::move(t));
    expect_offset = offset + nbytes;
  }
  if (expect_offset != payload_len)
    throw ParseError(path + ": tensor directory inconsistent with payload length");

  m.hp.validate();
  return m;
}

} // namespace mlsa

#include "egat/checkpoint.hpp"

#include "egat/error.hpp"
#include "egat/feature_config.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace egat {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) fail(ErrorCode::CorruptFile, "checkpoint truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> split_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoul(tok));
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metadata(const Model& m) {
  const ModelConfig& c = m.config();
  std::ostringstream out;
  out << "input_dim=" << c.input_dim << '\n'
      << "latent_dim=" << c.latent_dim << '\n'
      << "num_layers=" << c.num_layers << '\n'
      << "embed_hidden=" << join(c.embed_hidden) << '\n'
      << "decoder_hidden=" << join(c.decoder_hidden) << '\n'
      << "num_classes=" << c.num_classes << '\n'
      << "leaky_slope=" << fmt_double(c.leaky_slope) << '\n'
      << "dropout=" << fmt_double(c.dropout) << '\n'
      << "k=" << c.k << '\n'
      << "cutoff=" << fmt_double(c.cutoff) << '\n'
      << "step=" << m.step << '\n'
      << "feature_config_hash=" << m.feature_config_hash << '\n'
      << "feature_config=" << m.feature_config_json << '\n';
  return out.str();
}

ModelConfig parse_config(const std::map<std::string, std::string>& kv) {
  const auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::CorruptFile, std::string("checkpoint metadata lacks ") + key);
    return it->second;
  };
  ModelConfig c;
  try {
    c.input_dim = std::stoul(get("input_dim"));
    c.latent_dim = std::stoul(get("latent_dim"));
    c.num_layers = std::stoul(get("num_layers"));
    c.embed_hidden = split_sizes(get("embed_hidden"));
    c.decoder_hidden = split_sizes(get("decoder_hidden"));
    c.num_classes = std::stoul(get("num_classes"));
    c.leaky_slope = std::stod(get("leaky_slope"));
    c.dropout = std::stod(get("dropout"));
    c.k = std::stoi(get("k"));
    c.cutoff = std::stod(get("cutoff"));
  } catch (const std::logic_error&) {
    fail(ErrorCode::CorruptFile, "checkpoint metadata has a malformed number");
  }
  return c;
}

bool same_shapes(const ModelConfig& a, const ModelConfig& b) {
  return a.input_dim == b.input_dim && a.latent_dim == b.latent_dim && a.num_layers == b.num_layers &&
         a.embed_hidden == b.embed_hidden && a.decoder_hidden == b.decoder_hidden &&
         a.num_classes == b.num_classes;
}

}  // namespace

std::string serialize_checkpoint(const Model& m) {
  std::string out = "EGAT";
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string meta = metadata(m);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.names().size()));
  for (std::size_t i = 0; i < m.names().size(); ++i) {
    const std::string& name = m.names()[i];
    const Matrix& v = m.parameters()[i].value();
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, 2);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v.cols()));
    for (Eigen::Index k = 0; k < v.size(); ++k) put<float>(out, static_cast<float>(v.data()[k]));
  }
  put<std::uint32_t>(out, crc_of(out));
  return out;
}

void save_checkpoint(const Model& m, const std::string& path) {
  const std::string bytes = serialize_checkpoint(m);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Io, "cannot write " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(ErrorCode::Io, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorCode::Io, "cannot rename " + tmp);
}

Model deserialize_checkpoint(std::string_view bytes, const std::optional<ModelConfig>& expected) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "EGAT") fail(ErrorCode::CorruptFile, "not a checkpoint file");
  Reader r(bytes.substr(0, bytes.size() - 4));
  r.bytes(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    fail(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                         std::to_string(kCheckpointVersion));
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  if (stored_crc != crc_of(bytes.substr(0, bytes.size() - 4)))
    fail(ErrorCode::CorruptFile, "checkpoint checksum mismatch");

  const auto meta_len = r.get<std::uint32_t>();
  std::map<std::string, std::string> kv;
  {
    std::istringstream meta{std::string(r.bytes(meta_len))};
    std::string line;
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorCode::CorruptFile, "bad metadata line");
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  const ModelConfig config = parse_config(kv);
  if (expected && !same_shapes(config, *expected))
    fail(ErrorCode::ShapeMismatch, "checkpoint architecture (latent " + std::to_string(config.latent_dim) +
                                       ") does not match the expected one (latent " +
                                       std::to_string(expected->latent_dim) + ")");
  Model m = Model::zeros(config);
  m.feature_config_hash = kv["feature_config_hash"];
  m.feature_config_json = kv["feature_config"];
  try {
    m.step = std::stoll(kv.count("step") ? kv["step"] : "0");
  } catch (const std::logic_error&) {
    fail(ErrorCode::CorruptFile, "bad step counter");
  }
  if (!m.feature_config_json.empty()) {
    const std::string recomputed = FeatureConfig::from_json(m.feature_config_json).content_hash();
    if (recomputed != m.feature_config_hash)
      fail(ErrorCode::ConfigHashMismatch, "stored feature config hash does not match its config");
  }

  const auto count = r.get<std::uint32_t>();
  if (count != m.names().size())
    fail(ErrorCode::ShapeMismatch, "checkpoint has " + std::to_string(count) + " arrays, model needs " +
                                       std::to_string(m.names().size()));
  for (std::uint32_t a = 0; a < count; ++a) {
    const auto name_len = r.get<std::uint16_t>();
    const std::string name(r.bytes(name_len));
    if (name != m.names()[a]) fail(ErrorCode::ShapeMismatch, "unexpected array " + name);
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::uint32_t> dims(rank);
    std::size_t total = 1;
    for (auto& d : dims) {
      d = r.get<std::uint32_t>();
      total *= d;
    }
    Matrix& v = m.param(name).mutable_value();
    const bool ok = (rank == 2 && dims[0] == v.rows() && dims[1] == v.cols()) ||
                    (rank == 1 && dims[0] == v.size() && (v.rows() == 1 || v.cols() == 1));
    if (!ok) fail(ErrorCode::ShapeMismatch, "array " + name + " has an unexpected shape");
    for (std::size_t k = 0; k < total; ++k) v.data()[k] = static_cast<double>(r.get<float>());
  }
  if (r.pos() != bytes.size() - 4) fail(ErrorCode::CorruptFile, "trailing bytes in checkpoint");
  return m;
}

Model load_checkpoint(const std::string& path, const std::optional<ModelConfig>& expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str(), expected);
}

void quantize_to_float32(Model& m) {
  for (auto& p : m.parameters()) {
    Matrix& v = p.mutable_value();
    for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = static_cast<double>(static_cast<float>(v.data()[k]));
  }
}

std::string checkpoint_id(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return bytes_id(ss.str());
}

std::string bytes_id(std::string_view bytes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc_of(bytes));
  return buf;
}

}  // namespace egat

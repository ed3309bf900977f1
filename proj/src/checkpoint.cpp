#include "slotgraph/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace slotgraph::checkpoint {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'G', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& o, std::uint32_t v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& o, std::uint64_t v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_i64(std::ostream& o, std::int64_t v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& o, double v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u8(std::ostream& o, std::uint8_t v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::ostream& o, const std::string& s) {
  put_u32(o, static_cast<std::uint32_t>(s.size()));
  o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw VersionMismatch("truncated file");
  return v;
}

std::string get_str(std::istream& in) {
  auto n = get_pod<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw VersionMismatch("truncated file");
  return s;
}

void put_string_list(std::ostream& o, const std::vector<std::string>& v) {
  put_u32(o, static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) put_str(o, s);
}

std::vector<std::string> get_string_list(std::istream& in) {
  auto n = get_pod<std::uint32_t>(in);
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(get_str(in));
  return v;
}

void put_string_map(std::ostream& o,
                    const std::map<std::string, std::string>& m) {
  put_u32(o, static_cast<std::uint32_t>(m.size()));
  for (const auto& [k, v] : m) {
    put_str(o, k);
    put_str(o, v);
  }
}

std::map<std::string, std::string> get_string_map(std::istream& in) {
  auto n = get_pod<std::uint32_t>(in);
  std::map<std::string, std::string> m;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string k = get_str(in);
    m[k] = get_str(in);
  }
  return m;
}

}  // namespace

void save(const model::Model& m, const std::filesystem::path& path,
          const std::map<std::string, std::string>& meta) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + path.string());
  o.write(kMagic, sizeof kMagic);
  put_u32(o, kVersion);

  const model::ModelConfig& c = m.config();
  put_i64(o, c.d);
  put_i64(o, c.d_g);
  put_i64(o, c.gat_heads);
  put_f64(o, c.gat_dropout);
  put_i64(o, c.gat_layers);
  put_i64(o, c.enc_layers);
  put_i64(o, c.enc_heads);
  put_i64(o, c.max_len);
  put_u64(o, c.seed);
  put_u8(o, c.no_slot_label_attn ? 1 : 0);
  put_u8(o, c.no_intent_label_attn ? 1 : 0);
  put_u8(o, c.no_dep_encoder ? 1 : 0);

  put_string_list(o, m.words().words());
  put_string_list(o, m.labels().intent_names);
  put_string_list(o, m.labels().slot_type_names);
  put_string_map(o, m.labels().descriptions);
  put_string_map(o, meta);

  const auto& items = m.params().items();
  put_u32(o, static_cast<std::uint32_t>(items.size()));
  for (const auto& p : items) {
    put_str(o, p->name);
    put_u8(o, p->trainable ? 1 : 0);
    put_i64(o, p->value.rows());
    put_i64(o, p->value.cols());
    o.write(reinterpret_cast<const char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
  if (!o) throw std::runtime_error("write failed for " + path.string());
}

Loaded load_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw VersionMismatch("bad magic in " + path.string());
  }
  auto version = get_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw VersionMismatch("unsupported version " + std::to_string(version));
  }

  Loaded out;
  out.config.d = get_pod<std::int64_t>(in);
  out.config.d_g = get_pod<std::int64_t>(in);
  out.config.gat_heads = get_pod<std::int64_t>(in);
  out.config.gat_dropout = get_pod<double>(in);
  out.config.gat_layers = get_pod<std::int64_t>(in);
  out.config.enc_layers = get_pod<std::int64_t>(in);
  out.config.enc_heads = get_pod<std::int64_t>(in);
  out.config.max_len = get_pod<std::int64_t>(in);
  out.config.seed = get_pod<std::uint64_t>(in);
  out.config.no_slot_label_attn = get_pod<std::uint8_t>(in) != 0;
  out.config.no_intent_label_attn = get_pod<std::uint8_t>(in) != 0;
  out.config.no_dep_encoder = get_pod<std::uint8_t>(in) != 0;

  out.words.set_words(get_string_list(in));
  out.labels.intent_names = get_string_list(in);
  out.labels.slot_type_names = get_string_list(in);
  out.labels.descriptions = get_string_map(in);
  out.meta = get_string_map(in);

  auto n_params = get_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = get_str(in);
    bool trainable = get_pod<std::uint8_t>(in) != 0;
    auto rows = get_pod<std::int64_t>(in);
    auto cols = get_pod<std::int64_t>(in);
    if (rows < 0 || cols < 0 || rows * cols > (1LL << 30)) {
      throw VersionMismatch("implausible tensor shape for " + name);
    }
    Eigen::MatrixXd v(rows, cols);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
    if (!in) throw VersionMismatch("truncated tensor data for " + name);
    out.params.add(name, std::move(v), trainable);
  }
  return out;
}

model::Model load(const std::filesystem::path& path,
                  std::map<std::string, std::string>* meta_out) {
  Loaded raw = load_raw(path);
  if (meta_out) *meta_out = raw.meta;
  return model::Model(raw.config, std::move(raw.labels), std::move(raw.words),
                      std::move(raw.params));
}

}  // namespace slotgraph::checkpoint

#include "sentrep/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace sentrep {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

namespace {

constexpr char kMagic[8] = {'S', 'E', 'N', 'T', 'R', 'E', 'P', 'C'};
constexpr uint32_t kVersion = 1;

std::string fmt_double(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    size_t used = 0;
    double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw IntegrityError("checkpoint config key '" + key + "' has bad value '" + s + "'");
}

uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    size_t used = 0;
    unsigned long long x = std::stoull(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw IntegrityError("checkpoint config key '" + key + "' has bad value '" + s + "'");
}

void write_bytes(std::ofstream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32(std::ofstream& out, uint32_t x) { write_bytes(out, &x, 4); }
void write_u64(std::ofstream& out, uint64_t x) { write_bytes(out, &x, 8); }

void write_blob(std::ofstream& out, const std::string& s) {
  write_u64(out, s.size());
  write_bytes(out, s.data(), s.size());
}

void read_bytes(std::ifstream& in, void* p, size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw IntegrityError(std::string("checkpoint truncated while reading ") + what);
  }
}

uint32_t read_u32(std::ifstream& in, const char* what) {
  uint32_t x = 0;
  read_bytes(in, &x, 4, what);
  return x;
}

uint64_t read_u64(std::ifstream& in, const char* what) {
  uint64_t x = 0;
  read_bytes(in, &x, 8, what);
  return x;
}

std::string read_blob(std::ifstream& in, const char* what, uint64_t cap) {
  uint64_t n = read_u64(in, what);
  if (n > cap) {
    throw IntegrityError(std::string("checkpoint field ") + what +
                         " has an implausible size " + std::to_string(n));
  }
  std::string s(n, '\0');
  if (n) read_bytes(in, s.data(), n, what);
  return s;
}

std::string join_sizes(const std::vector<size_t>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::vector<size_t> split_sizes(const std::string& s, const std::string& key) {
  std::vector<size_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    out.push_back(parse_u64(part, key));
  }
  if (out.empty()) {
    throw IntegrityError("checkpoint config key '" + key + "' is empty");
  }
  return out;
}

}  // namespace

std::string checkpoint_config_text(const Model<float>& model,
                                   const TrainConfig& train) {
  const ModelDims& d = model.dims;
  std::string z_order;
  for (size_t i = 0; i < d.windows.size(); ++i) {
    if (i) z_order += ',';
    z_order += "w" + std::to_string(d.windows[i]);
  }
  std::ostringstream out;
  out << "kind=model\n"
      << "variant=" << variant_name(model.variant) << "\n"
      << "embed_mode=" << embed_mode_name(model.embed_mode) << "\n"
      << "embed_k=" << d.embed_k << "\n"
      << "windows=" << join_sizes(d.windows) << "\n"
      << "maps_per_window=" << d.maps_per_window << "\n"
      << "hidden=" << d.hidden << "\n"
      << "paragraph_hidden=" << d.paragraph_hidden << "\n"
      << "vocab_size=" << d.vocab << "\n"
      << "z_block_order=" << z_order << "\n"
      << "learning_rate=" << fmt_double(train.learning_rate) << "\n"
      << "adam_beta1=" << fmt_double(train.adam_beta1) << "\n"
      << "adam_beta2=" << fmt_double(train.adam_beta2) << "\n"
      << "adam_eps=" << fmt_double(train.adam_eps) << "\n"
      << "clip_norm=" << fmt_double(train.clip_norm) << "\n"
      << "batch_size=" << train.batch_size << "\n"
      << "sentences_per_paragraph=" << train.sentences_per_paragraph << "\n"
      << "dropout=" << fmt_double(train.dropout) << "\n"
      << "init_range=" << fmt_double(train.init_range) << "\n"
      << "forget_bias=" << fmt_double(train.forget_bias) << "\n"
      << "seed=" << train.seed << "\n"
      << "max_steps=" << train.max_steps << "\n";
  return out.str();
}

void save_checkpoint(Model<float>& model, const TrainConfig& train,
                     const Vocab& vocab, const std::string& path) {
  if (vocab.size() != model.dims.vocab) {
    throw ShapeError("vocabulary has " + std::to_string(vocab.size()) +
                     " entries but the model expects " +
                     std::to_string(model.dims.vocab));
  }
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    write_bytes(out, kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_blob(out, checkpoint_config_text(model, train));
    write_blob(out, vocab.to_tsv());

    uint64_t count = 0;
    model.for_each_param([&](const std::string&, Tensor<float>&) { ++count; });
    write_u64(out, count);
    model.for_each_param([&](const std::string& name, Tensor<float>& t) {
      write_u32(out, static_cast<uint32_t>(name.size()));
      write_bytes(out, name.data(), name.size());
      write_u32(out, static_cast<uint32_t>(t.shape.size()));
      for (size_t e : t.shape) write_u64(out, e);
      write_u64(out, t.numel() * sizeof(float));
      write_bytes(out, t.v.data(), t.numel() * sizeof(float));
    });
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot move '" + tmp + "' into place at '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IntegrityError("'" + path + "' is not a checkpoint file");
  }
  uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }

  constexpr uint64_t kTextCap = uint64_t{1} << 30;
  std::string config_text = read_blob(in, "config", kTextCap);
  std::string vocab_tsv = read_blob(in, "vocabulary", kTextCap);

  std::map<std::string, std::string> kv;
  for (const std::string& line : split_lines(config_text)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw IntegrityError("bad checkpoint config line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw IntegrityError(std::string("checkpoint config is missing '") + key + "'");
    }
    return it->second;
  };
  if (need("kind") != "model") {
    throw IntegrityError("checkpoint kind '" + need("kind") + "' is not a model");
  }

  ModelDims dims;
  dims.embed_k = parse_u64(need("embed_k"), "embed_k");
  dims.windows = split_sizes(need("windows"), "windows");
  dims.maps_per_window = parse_u64(need("maps_per_window"), "maps_per_window");
  dims.hidden = parse_u64(need("hidden"), "hidden");
  dims.paragraph_hidden = parse_u64(need("paragraph_hidden"), "paragraph_hidden");
  dims.vocab = parse_u64(need("vocab_size"), "vocab_size");

  Checkpoint ck;
  ck.model = allocate_model<float>(variant_from_name(need("variant")), dims,
                                   embed_mode_from_name(need("embed_mode")));
  std::string z_order;
  for (size_t i = 0; i < dims.windows.size(); ++i) {
    if (i) z_order += ',';
    z_order += "w" + std::to_string(dims.windows[i]);
  }
  if (need("z_block_order") != z_order) {
    throw IntegrityError("checkpoint z_block_order '" + need("z_block_order") +
                         "' does not match windows " + need("windows"));
  }

  ck.train.learning_rate = parse_double(need("learning_rate"), "learning_rate");
  ck.train.adam_beta1 = parse_double(need("adam_beta1"), "adam_beta1");
  ck.train.adam_beta2 = parse_double(need("adam_beta2"), "adam_beta2");
  ck.train.adam_eps = parse_double(need("adam_eps"), "adam_eps");
  ck.train.clip_norm = parse_double(need("clip_norm"), "clip_norm");
  ck.train.batch_size = parse_u64(need("batch_size"), "batch_size");
  ck.train.sentences_per_paragraph =
      parse_u64(need("sentences_per_paragraph"), "sentences_per_paragraph");
  ck.train.dropout = parse_double(need("dropout"), "dropout");
  ck.train.init_range = parse_double(need("init_range"), "init_range");
  ck.train.forget_bias = parse_double(need("forget_bias"), "forget_bias");
  ck.train.seed = parse_u64(need("seed"), "seed");
  ck.train.max_steps = parse_u64(need("max_steps"), "max_steps");

  ck.vocab = Vocab::from_tsv(vocab_tsv);
  if (ck.vocab.size() != dims.vocab) {
    throw IntegrityError("checkpoint vocabulary has " +
                         std::to_string(ck.vocab.size()) +
                         " entries but the config says " +
                         std::to_string(dims.vocab));
  }

  std::map<std::string, Tensor<float>*> slots;
  ck.model.for_each_param([&](const std::string& name, Tensor<float>& t) {
    slots[name] = &t;
  });

  uint64_t count = read_u64(in, "tensor count");
  if (count != slots.size()) {
    throw IntegrityError("checkpoint holds " + std::to_string(count) +
                         " tensors but the config implies " +
                         std::to_string(slots.size()));
  }
  std::map<std::string, bool> seen;
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t name_len = read_u32(in, "tensor name length");
    if (name_len > 4096) throw IntegrityError("implausible tensor name length");
    std::string name(name_len, '\0');
    read_bytes(in, name.data(), name_len, "tensor name");
    uint32_t rank = read_u32(in, "tensor rank");
    if (rank > 8) throw IntegrityError("implausible tensor rank");
    std::vector<size_t> shape(rank);
    for (uint32_t r = 0; r < rank; ++r) {
      shape[r] = read_u64(in, "tensor extent");
    }
    uint64_t bytes = read_u64(in, "tensor payload size");

    auto it = slots.find(name);
    if (it == slots.end()) {
      throw IntegrityError("checkpoint holds unexpected tensor '" + name + "'");
    }
    if (seen[name]) {
      throw IntegrityError("checkpoint holds tensor '" + name + "' twice");
    }
    seen[name] = true;
    Tensor<float>& t = *it->second;
    if (shape != t.shape) {
      throw ShapeError("checkpoint tensor '" + name + "' is " + shape_str(shape) +
                       " but this configuration needs " + shape_str(t.shape));
    }
    if (bytes != t.numel() * sizeof(float)) {
      throw IntegrityError("checkpoint tensor '" + name + "' payload size is wrong");
    }
    read_bytes(in, t.v.data(), bytes, "tensor payload");
  }
  return ck;
}

}  // namespace sentrep

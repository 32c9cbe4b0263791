#include "mwe/persistence.h"

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include <unistd.h>

namespace mwe {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

std::string os_error(const std::filesystem::path& path) {
  return path.string() + ": " + std::strerror(errno);
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path) {
    file_.reset(std::fopen(path.c_str(), "wb"));
    if (!file_) throw CheckpointError("cannot open for writing: " + os_error(path));
  }

  void bytes(const void* data, std::size_t size) {
    if (size > 0 && std::fwrite(data, 1, size, file_.get()) != size) {
      throw CheckpointError("write failed: " + os_error(path_));
    }
  }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void f64s(std::span<const double> values) {
    std::vector<unsigned char> buf(values.size() * 8);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const auto v = std::bit_cast<std::uint64_t>(values[k]);
      for (int i = 0; i < 8; ++i) buf[8 * k + i] = static_cast<unsigned char>(v >> (8 * i));
    }
    bytes(buf.data(), buf.size());
  }

  void finish() {
    if (std::fflush(file_.get()) != 0) throw CheckpointError("flush failed: " + os_error(path_));
    if (::fsync(::fileno(file_.get())) != 0) {
      throw CheckpointError("fsync failed: " + os_error(path_));
    }
    std::FILE* f = file_.release();
    if (std::fclose(f) != 0) throw CheckpointError("close failed: " + os_error(path_));
  }

 private:
  std::filesystem::path path_;
  File file_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    file_.reset(std::fopen(path.c_str(), "rb"));
    if (!file_) throw CheckpointError("cannot open: " + os_error(path));
  }

  void bytes(void* data, std::size_t size) {
    if (size > 0 && std::fread(data, 1, size, file_.get()) != size) {
      throw CheckpointError("truncated checkpoint: " + path_.string());
    }
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    bytes(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::uint64_t max_len) {
    const std::uint64_t len = u64();
    if (len > max_len) throw CheckpointError("truncated checkpoint: " + path_.string());
    std::string s(len, '\0');
    bytes(s.data(), len);
    return s;
  }
  void f64s(std::span<double> values) {
    std::vector<unsigned char> buf(values.size() * 8);
    bytes(buf.data(), buf.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[8 * k + i]) << (8 * i);
      values[k] = std::bit_cast<double>(v);
    }
  }
  bool at_end() { return std::fgetc(file_.get()) == EOF; }

 private:
  std::filesystem::path path_;
  File file_;
};

CheckpointHeader read_header(Reader& in, const std::filesystem::path& path) {
  char magic[4];
  try {
    in.bytes(magic, 4);
  } catch (const CheckpointError&) {
    throw CheckpointError("not an MWE checkpoint: " + path.string());
  }
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not an MWE checkpoint: " + path.string());
  }
  CheckpointHeader h;
  h.version = in.u64();
  if (h.version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(h.version) +
                          " (expected " + std::to_string(kCheckpointVersion) + "): " +
                          path.string());
  }
  h.dims.words = in.u64();
  h.dims.relations = in.u64();
  h.dims.dim = in.u64();
  h.dims.local_dim = in.u64();
  h.drift = in.f64();
  h.scale_k = in.f64();
  h.epoch = in.u64();
  h.seed = in.u64();
  return h;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  const ModelDims& dims = c.params.dims();
  if (dims.words != c.vocab.size() || dims.relations != c.relations.size()) {
    throw CheckpointError("checkpoint vocabulary/relations do not match model dimensions");
  }
  Writer out(path);
  out.bytes(kCheckpointMagic, 4);
  out.u64(kCheckpointVersion);
  out.u64(dims.words);
  out.u64(dims.relations);
  out.u64(dims.dim);
  out.u64(dims.local_dim);
  out.f64(c.params.drift());
  out.f64(c.params.scale_k());
  out.u64(c.epoch);
  out.u64(c.seed);
  for (WordId w = 0; w < c.vocab.size(); ++w) {
    out.str(c.vocab.word(w));
    out.u64(c.vocab.freq(w));
  }
  for (RelationId r = 0; r < c.relations.size(); ++r) {
    out.str(c.relations.name(r));
    out.u64(c.relations.tuple_count(r));
  }
  c.params.for_each_tensor([&](const Matrix& m) { out.f64s(m.values()); });
  out.finish();
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  Reader in(path);
  return read_header(in, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw CheckpointError("cannot stat " + path.string() + ": " + ec.message());

  Reader in(path);
  const CheckpointHeader h = read_header(in, path);
  const std::uint64_t tensor_bytes =
      8 * param_count(h.dims.words, h.dims.relations, h.dims.dim, h.dims.local_dim);
  if (kCheckpointHeaderBytes + tensor_bytes > file_size) {
    throw CheckpointError("truncated checkpoint: " + path.string());
  }

  Checkpoint c;
  c.epoch = h.epoch;
  c.seed = h.seed;
  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  for (std::uint64_t i = 0; i < h.dims.words; ++i) {
    words.push_back(in.str(file_size));
    freqs.push_back(in.u64());
  }
  std::vector<std::string> names;
  std::vector<std::uint64_t> counts;
  for (std::uint64_t i = 0; i < h.dims.relations; ++i) {
    names.push_back(in.str(file_size));
    counts.push_back(in.u64());
  }
  try {
    c.vocab = Vocabulary(std::move(words), std::move(freqs));
    c.relations = RelationRegistry(std::move(names), std::move(counts));
    c.params = ModelParams(h.dims, h.drift, h.scale_k);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  c.params.for_each_tensor([&](Matrix& m) { in.f64s(m.values()); });
  if (!in.at_end()) {
    throw CheckpointError("checkpoint has trailing bytes: " + path.string());
  }
  return c;
}

std::uint64_t vocab_block_bytes(const Vocabulary& vocab, const RelationRegistry& relations) {
  std::uint64_t total = 0;
  for (const std::string& w : vocab.words()) total += 16 + w.size();
  for (const std::string& r : relations.names()) total += 16 + r.size();
  return total;
}

std::uint64_t checkpoint_bytes(const Checkpoint& c) {
  const ModelDims& d = c.params.dims();
  return kCheckpointHeaderBytes + vocab_block_bytes(c.vocab, c.relations) +
         8 * param_count(d.words, d.relations, d.dim, d.local_dim);
}

void export_text(const ModelParams& params, const Vocabulary& vocab,
                 const RelationRegistry& relations, VectorSource source, Combiner combiner,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open for writing: " + os_error(path));
  const std::size_t dim =
      combiner == Combiner::kConcat ? 2 * params.dims().dim : params.dims().dim;
  out << vocab.size() << ' ' << dim << '\n';
  const std::string suffix = source.relation ? "@" + relations.name(*source.relation) : "";
  char buf[64];
  for (WordId w = 0; w < vocab.size(); ++w) {
    out << vocab.word(w) << suffix;
    for (double x : word_vector(params, w, source, combiner)) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out << buf;
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw CheckpointError("write failed: " + os_error(path));
}

}  // namespace mwe

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "mwe/eval.h"
#include "mwe/model.h"
#include "mwe/vocab.h"

namespace mwe {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[4] = {'M', 'W', 'E', '1'};
inline constexpr std::uint64_t kCheckpointVersion = 1;
// magic + version, n, m, d, s, a, k, epoch, seed.
inline constexpr std::uint64_t kCheckpointHeaderBytes = 4 + 9 * 8;

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
  RelationRegistry relations;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;

  bool operator==(const Checkpoint&) const = default;
};

// Layout (little-endian):
//   "MWE1", u64 version, u64 n, m, d, s, f64 a, k, u64 epoch, seed,
//   n x (u64 length, bytes, u64 freq), m x (u64 length, bytes, u64 count),
//   f64 tensors in ModelParams::for_each_tensor order.
// The file is fsync'd before returning. Throws CheckpointError on I/O failure.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

// Throws CheckpointError for a wrong magic, an unsupported version, a
// truncated file or trailing bytes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Header fields only; cheap for large files.
struct CheckpointHeader {
  std::uint64_t version = 0;
  ModelDims dims;
  double drift = 0.0;
  double scale_k = 0.0;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
};
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Bytes taken by the vocabulary and relation blocks.
std::uint64_t vocab_block_bytes(const Vocabulary& vocab, const RelationRegistry& relations);

// Exact file size save_checkpoint produces.
std::uint64_t checkpoint_bytes(const Checkpoint& checkpoint);

// Word2vec-style text: `<rows> <dim>` then `token v1 ... vdim` with six
// decimals. Tokens are bare words for center exports and `word@relation`
// for relational exports.
void export_text(const ModelParams& params, const Vocabulary& vocab,
                 const RelationRegistry& relations, VectorSource source, Combiner combiner,
                 const std::filesystem::path& path);

}  // namespace mwe

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mwe/persistence.h"
#include "test_util.h"

namespace mwe {
namespace {

using testing::fill_uniform;
using testing::temp_dir;

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.vocab = Vocabulary({"dog", "barks", "air"}, {9, 4, 2});
  c.relations = RelationRegistry({"amod", "nsubj"}, {3, 5});
  c.params = ModelParams({3, 2, 5, 2}, 1.0, 0.8);
  fill_uniform(c.params, 17);
  c.params.center(Role::kHead)(0, 0) = -0.0;
  c.params.center(Role::kHead)(0, 1) = 1e-310;
  c.epoch = 6;
  c.seed = 0xfeedfacecafebeefULL;
  return c;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

TEST(Checkpoint, RoundTripIsIdentity) {
  const auto dir = temp_dir("ckpt_roundtrip");
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(c, dir / "m.ckpt");
  const Checkpoint back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back, c);
  EXPECT_TRUE(std::signbit(back.params.center(Role::kHead)(0, 0)));
  save_checkpoint(back, dir / "again.ckpt");
  EXPECT_EQ(read_bytes(dir / "m.ckpt"), read_bytes(dir / "again.ckpt"));
}

TEST(Checkpoint, SizeArithmetic) {
  const auto dir = temp_dir("ckpt_size");
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(c, dir / "m.ckpt");
  // header 4 + 9*8; vocab (8+3+8)+(8+5+8)+(8+3+8); relations (8+4+8)+(8+5+8).
  const std::uint64_t expected = 76 + 19 + 21 + 19 + 20 + 21 + 8 * param_count(3, 2, 5, 2);
  EXPECT_EQ(std::filesystem::file_size(dir / "m.ckpt"), expected);
  EXPECT_EQ(checkpoint_bytes(c), expected);
}

TEST(Checkpoint, HeaderLayout) {
  const auto dir = temp_dir("ckpt_header");
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(c, dir / "m.ckpt");
  const std::string bytes = read_bytes(dir / "m.ckpt");
  EXPECT_EQ(bytes.substr(0, 4), "MWE1");
  auto u64_at = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
  };
  EXPECT_EQ(u64_at(4), 1u);
  EXPECT_EQ(u64_at(12), 3u);
  EXPECT_EQ(u64_at(20), 2u);
  EXPECT_EQ(u64_at(28), 5u);
  EXPECT_EQ(u64_at(36), 2u);
  EXPECT_EQ(u64_at(60), 6u);
  EXPECT_EQ(u64_at(68), c.seed);
  const CheckpointHeader h = read_checkpoint_header(dir / "m.ckpt");
  EXPECT_EQ(h.dims, c.params.dims());
  EXPECT_EQ(h.scale_k, 0.8);
}

void expect_error(const std::filesystem::path& p, const std::string& fragment) {
  try {
    load_checkpoint(p);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, BadMagic) {
  const auto dir = temp_dir("ckpt_magic");
  save_checkpoint(sample_checkpoint(), dir / "m.ckpt");
  std::string bytes = read_bytes(dir / "m.ckpt");
  bytes[0] = 'X';
  write_bytes(dir / "m.ckpt", bytes);
  expect_error(dir / "m.ckpt", "not an MWE checkpoint");
}

TEST(Checkpoint, VersionMismatch) {
  const auto dir = temp_dir("ckpt_version");
  save_checkpoint(sample_checkpoint(), dir / "m.ckpt");
  std::string bytes = read_bytes(dir / "m.ckpt");
  bytes[4] = 2;
  write_bytes(dir / "m.ckpt", bytes);
  expect_error(dir / "m.ckpt", "version");
}

TEST(Checkpoint, TruncatedAndTrailing) {
  const auto dir = temp_dir("ckpt_trunc");
  save_checkpoint(sample_checkpoint(), dir / "m.ckpt");
  const std::string bytes = read_bytes(dir / "m.ckpt");
  write_bytes(dir / "short.ckpt", bytes.substr(0, bytes.size() - 1));
  expect_error(dir / "short.ckpt", "truncated");
  write_bytes(dir / "tiny.ckpt", bytes.substr(0, 30));
  expect_error(dir / "tiny.ckpt", "truncated");
  write_bytes(dir / "long.ckpt", bytes + "x");
  expect_error(dir / "long.ckpt", "trailing");
}

TEST(Checkpoint, UnwritablePath) {
  EXPECT_THROW(save_checkpoint(sample_checkpoint(), "/nonexistent-dir/m.ckpt"), CheckpointError);
  EXPECT_THROW(load_checkpoint("/nonexistent-dir/m.ckpt"), CheckpointError);
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(ExportText, CenterHead) {
  const auto dir = temp_dir("export_center");
  const Checkpoint c = sample_checkpoint();
  export_text(c.params, c.vocab, c.relations, {}, Combiner::kHead, dir / "v.txt");
  const auto lines = lines_of(dir / "v.txt");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "3 5");
  std::istringstream row(lines[2]);
  std::string token;
  row >> token;
  EXPECT_EQ(token, "barks");
  for (std::size_t j = 0; j < 5; ++j) {
    double v;
    row >> v;
    EXPECT_NEAR(v, c.params.center(Role::kHead)(1, j), 5e-7);
  }
}

TEST(ExportText, ConcatAndRelational) {
  const auto dir = temp_dir("export_rel");
  Checkpoint c = sample_checkpoint();
  export_text(c.params, c.vocab, c.relations, {RelationId{1}}, Combiner::kConcat, dir / "cat.txt");
  const auto cat = lines_of(dir / "cat.txt");
  EXPECT_EQ(cat[0], "3 10");
  EXPECT_EQ(cat[1].substr(0, 10), "dog@nsubj ");

  for (double& x : c.params.local(Role::kTail, 0).values()) x = 0;
  export_text(c.params, c.vocab, c.relations, {RelationId{0}}, Combiner::kTail, dir / "rel.txt");
  export_text(c.params, c.vocab, c.relations, {}, Combiner::kTail, dir / "ctr.txt");
  const auto rel = lines_of(dir / "rel.txt"), ctr = lines_of(dir / "ctr.txt");
  ASSERT_EQ(rel.size(), ctr.size());
  for (std::size_t i = 1; i < rel.size(); ++i) {
    const std::string word = ctr[i].substr(0, ctr[i].find(' '));
    EXPECT_EQ(rel[i], word + "@amod" + ctr[i].substr(word.size()));
  }
}

}  // namespace
}  // namespace mwe

#pragma once

#include "mwe/corpus.h"
#include "mwe/oracle.h"
#include "mwe/trainer.h"
#include "mwe/vocab.h"

namespace mwe::testing {

// 4 groups x 50 words, 3 relations, ~50k tuples.
struct Planted {
  SynthCorpus synth;
  VocabBuild vocab;
  TupleCorpus corpus;

  explicit Planted(std::uint64_t seed = 1) : synth(synth_corpus(planted_spec(4, 50, 3, 50000 / 3, seed))) {
    vocab = build_vocab(synth.tuples, kDefaultMinCount);
    corpus = encode_corpus(synth.tuples, vocab.vocab, vocab.relations);
  }
};

// d=32, s=4, eta0=0.1, 6 epochs.
inline TrainConfig desk_config(std::uint64_t seed = 1) {
  TrainConfig c;
  c.dim = 32;
  c.local_dim = 4;
  c.eta0 = 0.1;
  c.epochs = 6;
  c.seed = seed;
  return c;
}

}  // namespace mwe::testing

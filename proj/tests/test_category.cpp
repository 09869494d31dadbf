#include <doctest.h>

#include <cmath>

#include "seeclear/category.hpp"
#include "test_util.hpp"

using namespace seeclear;
using seeclear::test::random_tensor;

namespace {

std::vector<Tensor> scales(std::size_t m, std::size_t c, std::uint64_t seed) {
  // Decoder-like pyramid: 8, 16, 32, 32.
  return {random_tensor({m, c, 8, 8}, seed), random_tensor({m, c, 16, 16}, seed + 1),
          random_tensor({m, c, 32, 32}, seed + 2), random_tensor({m, c, 32, 32}, seed + 3)};
}

MemoryBank random_bank(const CategoryConfig& cfg, std::uint64_t seed) {
  MemoryBank bank = MemoryBank::zeros(cfg);
  for (std::size_t j = 0; j < cfg.groups; ++j) {
    bank.groups[j].semantics = random_tensor({cfg.channel_dim, cfg.channel_dim}, seed + 2 * j);
    bank.groups[j].textures = random_tensor({cfg.channel_dim, cfg.texture_dim}, seed + 2 * j + 1);
  }
  return bank;
}

}  // namespace

TEST_CASE("zero bank") {
  const CategoryConfig cfg{4, 8, 6};
  const MemoryBank bank = MemoryBank::zeros(cfg);
  CHECK(bank.groups.size() == 4);
  CHECK(bank.groups[0].semantics.shape() == Shape{8, 8});
  CHECK(bank.groups[0].textures.shape() == Shape{8, 6});
  CHECK(bank.updates == 0);
  CHECK_THROWS_AS(MemoryBank::zeros({0, 8, 6}), std::invalid_argument);

  // Zero features keep a zero bank at zero.
  const CategoryWeights w = CategoryWeights::seeded(cfg, 1);
  std::vector<Tensor> zero{Tensor({2, 6, 4, 4}), Tensor({2, 6, 8, 8}), Tensor({2, 6, 16, 16}), Tensor({2, 6, 16, 16})};
  const MemoryBank next = build_or_update(bank, zero, w);
  CHECK(next.updates == 1);
  for (const auto& g : next.groups) {
    CHECK(max_abs(g.semantics) == 0.0);
    CHECK(max_abs(g.textures) == 0.0);
  }
}

TEST_CASE("affinity normalization") {
  const CategoryConfig cfg{2, 6, 4};
  const MemoryBank bank = random_bank(cfg, 3);
  const Tensor clip = random_tensor({5, 6}, 4, -3, 3);
  const Tensor a = memory_affinity(clip, bank.groups[0], SoftmaxAxis::kMemory);
  CHECK(a.shape() == Shape{5, 6});
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 6; ++c) s += a.at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const Tensor t = memory_affinity(clip, bank.groups[0], SoftmaxAxis::kToken);
  for (std::size_t c = 0; c < 6; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 5; ++r) s += t.at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  // One memory channel: every token puts all its weight there.
  const CategoryConfig one{1, 1, 4};
  const MemoryBank b1 = random_bank(one, 9);
  const Tensor a1 = memory_affinity(random_tensor({3, 1}, 1), b1.groups[0], SoftmaxAxis::kMemory);
  for (double v : a1.values())
    CHECK(v == 1.0);
  CHECK_THROWS_AS(memory_affinity(random_tensor({3, 5}, 1), bank.groups[0], SoftmaxAxis::kMemory), DimensionError);
}

TEST_CASE("query against the composed formula") {
  const CategoryConfig cfg{3, 6, 4};
  const MemoryBank bank = random_bank(cfg, 10);
  const CategoryWeights w = CategoryWeights::seeded(cfg, 2);
  const Tensor clip = random_tensor({5, 6}, 11);
  const Tensor f = random_tensor({12, 4}, 12);
  std::vector<Tensor> mixes;
  for (const auto& g : bank.groups) mixes.push_back(matmul(softmax_rows(matmul(clip, g.semantics)), g.textures));
  const Tensor expected = add(cross_attention(f, concat_rows(mixes), w.read), f);
  const MemoryBank before = bank;
  CHECK(max_abs_diff(query(clip, bank, f, w), expected) < 1e-13);
  CHECK(bank == before);

  // Zero textures read back zero values: the query is the identity.
  MemoryBank blank = bank;
  for (auto& g : blank.groups) g.textures = Tensor(g.textures.shape());
  CHECK(query(clip, blank, f, w) == f);
  CHECK(query(clip, MemoryBank::zeros(cfg), f, w) == f);
}

TEST_CASE("bank updates are stateful and deterministic") {
  const CategoryConfig cfg{4, 8, 6};
  const CategoryWeights w = CategoryWeights::seeded(cfg, 5);
  const auto feats = scales(3, 6, 20);
  MemoryBank seeded = random_bank(cfg, 30);
  const MemoryBank once = build_or_update(seeded, feats, w);
  const MemoryBank again = build_or_update(seeded, feats, w);
  CHECK(once == again);
  CHECK(once.updates == 1);
  const MemoryBank twice = build_or_update(once, feats, w);
  CHECK(twice.updates == 2);
  CHECK(max_abs_diff(twice.groups[0].textures, once.groups[0].textures) > 1e-6);
  for (const auto& g : twice.groups) {
    CHECK(g.semantics.all_finite());
    CHECK(g.textures.all_finite());
  }

  // Feature order within the pooled token set does not matter.
  auto swapped = feats;
  std::swap(swapped[2], swapped[3]);
  const MemoryBank s = build_or_update(seeded, swapped, w);
  for (std::size_t j = 0; j < 4; ++j) CHECK(max_abs_diff(s.groups[j].textures, once.groups[j].textures) < 1e-12);

  auto three = feats;
  three.pop_back();
  CHECK_THROWS_AS(build_or_update(seeded, three, w), DimensionError);
  auto uneven = feats;
  uneven[1] = random_tensor({3, 6, 12, 12}, 1);
  CHECK_THROWS_AS(build_or_update(seeded, uneven, w), DimensionError);
  // Rectangular maps pool onto the coarsest grid.
  std::vector<Tensor> rect{random_tensor({1, 6, 4, 8}, 1), random_tensor({1, 6, 8, 16}, 2),
                           random_tensor({1, 6, 16, 32}, 3), random_tensor({1, 6, 16, 32}, 4)};
  CHECK(build_or_update(seeded, rect, w).updates == 1);
}

TEST_CASE("row layer norm") {
  const Tensor n = layer_norm_rows(random_tensor({4, 9}, 1));
  for (std::size_t r = 0; r < 4; ++r) {
    double m = 0.0;
    for (std::size_t c = 0; c < 9; ++c) m += n.at(r, c) / 9.0;
    CHECK(std::abs(m) < 1e-12);
  }
  CHECK(max_abs(layer_norm_rows(Tensor({3, 4}))) == 0.0);
}

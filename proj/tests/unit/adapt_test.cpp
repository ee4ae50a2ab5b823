#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "histkit/adapt/batching.hpp"
#include "histkit/adapt/losses.hpp"
#include "histkit/adapt/model.hpp"
#include "histkit/adapt/trainer.hpp"
#include "histkit/embed/matrix.hpp"
#include "histkit/error.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace histkit::adapt {
namespace {

using embed::EmbeddingMatrix;

Rows random_rows(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Rows r(n, dim);
  for (auto& x : r.v) x = g(rng);
  return r;
}

// Straight from the definition: mean over i of
// -log softmax_j(scale * cos(a_i, b_j))[i].
double naive_mnrl(const Rows& a, const Rows& b, double scale) {
  double total = 0;
  for (std::size_t i = 0; i < a.n; ++i) {
    std::vector<double> logits(b.n);
    for (std::size_t j = 0; j < b.n; ++j) {
      double ab = 0, aa = 0, bb = 0;
      for (std::size_t d = 0; d < a.dim; ++d) {
        ab += a.row(i)[d] * b.row(j)[d];
        aa += a.row(i)[d] * a.row(i)[d];
        bb += b.row(j)[d] * b.row(j)[d];
      }
      logits[j] = scale * ab / std::sqrt(aa * bb);
    }
    double z = 0;
    for (double l : logits) z += std::exp(l - logits[i]);
    total += std::log(z);
  }
  return total / static_cast<double>(a.n);
}

std::vector<std::string> ids(std::size_t n, const std::string& prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

EmbeddingMatrix to_matrix(const std::vector<std::vector<float>>& rows, const std::string& prefix) {
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EmbeddingMatrix(rows[0].size(), ids(rows.size(), prefix), data);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(Mnrl, UniformSimilaritiesGiveLogN) {
  for (std::size_t n : {2u, 5u, 8u}) {
    Rows a(n, 3), b(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      a.row(i)[0] = 1.0 + static_cast<double>(i);
      b.row(i)[0] = 2.0;
    }
    EXPECT_NEAR(mnrl_loss(a, b).loss, std::log(static_cast<double>(n)), 1e-12);
  }
}

TEST(Mnrl, OrthogonalPositivesGiveTheTinyLandmark) {
  Rows a(2, 2), b(2, 2);
  a.row(0)[0] = b.row(0)[0] = 1;
  a.row(1)[1] = b.row(1)[1] = 1;
  const double want = std::log1p(std::exp(-20.0));
  EXPECT_NEAR(mnrl_loss(a, b, 20.0).loss, want, 1e-15);
  EXPECT_GT(mnrl_loss(a, b, 20.0).loss, 0.0);
}

TEST(Mnrl, MatchesNaiveForwardAndIsScaleInvariantInInputs) {
  std::mt19937_64 rng(1);
  const auto a = random_rows(6, 5, rng);
  const auto b = random_rows(6, 5, rng);
  const double base = mnrl_loss(a, b, 7.0).loss;
  EXPECT_NEAR(base, naive_mnrl(a, b, 7.0), 1e-12);
  Rows a3 = a;
  for (auto& x : a3.v) x *= 3.5;
  EXPECT_NEAR(mnrl_loss(a3, b, 7.0).loss, base, 1e-12);
}

TEST(Mnrl, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(2);
  for (std::size_t dim : {4u, 16u}) {
    const auto a = random_rows(5, dim, rng);
    const auto b = random_rows(5, dim, rng);
    const auto r = mnrl_loss(a, b, 20.0, true);
    const auto fa = [&](const std::vector<double>& x) {
      Rows p = a;
      p.v = x;
      return mnrl_loss(p, b, 20.0).loss;
    };
    const auto fb = [&](const std::vector<double>& x) {
      Rows p = b;
      p.v = x;
      return mnrl_loss(a, p, 20.0).loss;
    };
    EXPECT_LT(testing::relative_error(r.grad_a.v, testing::central_difference(fa, a.v, 1e-6)), 1e-5) << dim;
    EXPECT_LT(testing::relative_error(r.grad_b.v, testing::central_difference(fb, b.v, 1e-6)), 1e-5) << dim;
  }
}

TEST(Mnrl, GradBOnlyWhenAsked) {
  std::mt19937_64 rng(3);
  const auto a = random_rows(3, 4, rng);
  const auto b = random_rows(3, 4, rng);
  EXPECT_TRUE(mnrl_loss(a, b).grad_b.v.empty());
  EXPECT_EQ(mnrl_loss(a, b, 20.0, true).grad_b.v.size(), 12u);
}

TEST(Mnrl, RejectsBadBatches) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(mnrl_loss(random_rows(1, 3, rng), random_rows(1, 3, rng)), Error);
  EXPECT_THROW(mnrl_loss(random_rows(2, 3, rng), random_rows(2, 4, rng)), Error);
  EXPECT_THROW(mnrl_loss(random_rows(2, 3, rng), Rows(2, 3)), Error);
}

TEST(Distill, Landmarks) {
  std::mt19937_64 rng(5);
  const auto s = random_rows(4, 3, rng);
  const auto same = distill_loss(s, s);
  EXPECT_EQ(same.loss, 0.0);
  for (double g : same.grad_a.v) EXPECT_EQ(g, 0.0);

  Rows one(1, 2), zero(1, 2);
  one.row(0)[0] = 1.0;
  EXPECT_DOUBLE_EQ(distill_loss(one, zero).loss, 0.5);
  EXPECT_THROW(distill_loss(one, Rows(1, 3)), Error);
}

TEST(Distill, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(6);
  const auto s = random_rows(4, 8, rng);
  const auto t = random_rows(4, 8, rng);
  const auto f = [&](const std::vector<double>& x) {
    Rows p = s;
    p.v = x;
    return distill_loss(p, t).loss;
  };
  EXPECT_LT(testing::relative_error(distill_loss(s, t).grad_a.v, testing::central_difference(f, s.v, 1e-5)), 1e-8);
}

TEST(Model, ApplyMatchesOracle) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  auto m = AdapterModel::identity(5);
  for (auto& x : m.W) x = g(rng);
  for (auto& x : m.b) x = g(rng);
  std::vector<double> x(5);
  for (auto& v : x) v = g(rng);
  const auto want = testing::oracle_affine(m.W, m.b, x);
  const auto got = apply_adapter(m, std::span<const double>(x));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Model, IdentityAndDoubling) {
  auto m = AdapterModel::identity(2);
  const std::vector<float> x{1.0f, 1.0f};
  EXPECT_EQ(apply_adapter(m, std::span<const float>(x)), x);
  m.W = {2, 0, 0, 2};
  EXPECT_EQ(apply_adapter(m, std::span<const float>(x)), (std::vector<float>{2, 2}));
  const std::vector<float> wrong{1, 2, 3};
  EXPECT_THROW(apply_adapter(m, std::span<const float>(wrong)), Error);
}

TEST(Model, MatrixApplyKeepsIds) {
  auto m = AdapterModel::identity(2);
  m.W = {0, 1, 1, 0};
  const EmbeddingMatrix e(2, {"x", "y"}, {1, 2, 3, 4});
  const auto out = apply_adapter(m, e);
  EXPECT_EQ(out.ids(), e.ids());
  EXPECT_EQ(out.row(1)[0], 4.0f);
}

TEST(Model, EnumNamesRoundTrip) {
  for (auto o : {Objective::kContrastive, Objective::kDistill}) EXPECT_EQ(parse_objective(to_string(o)), o);
  for (auto s : {Strategy::kHist, Strategy::kModern, Strategy::kMixed}) EXPECT_EQ(parse_strategy(to_string(s)), s);
  for (auto a : {ApplyTo::kSource, ApplyTo::kBoth}) EXPECT_EQ(parse_apply_to(to_string(a)), a);
  EXPECT_THROW(parse_strategy("historic"), Error);
}

TEST(Hxad, RoundTripIsExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  auto m = AdapterModel::identity(7);
  for (auto& x : m.W) x = g(rng);
  for (auto& x : m.b) x = g(rng);
  m.objective = Objective::kDistill;
  m.strategy = Strategy::kMixed;
  m.hist_pairs = 11;
  m.modern_pairs = 13;
  m.seed = 0xFFFFFFFFFFFFFFFFull;
  m.learning_rate = 1e-3;
  m.epochs = 5;
  m.batch_size = 8;
  m.apply_to = ApplyTo::kBoth;
  EXPECT_EQ(decode_adapter(encode_adapter(m)), m);
  testing::TempDir dir;
  save_adapter(m, dir / "a.hxad");
  EXPECT_EQ(load_adapter(dir / "a.hxad"), m);
}

TEST(Hxad, StructuredDecodeErrors) {
  const auto bytes = encode_adapter(AdapterModel::identity(3));
  EXPECT_EQ(code_of([&] { decode_adapter(bytes.substr(0, bytes.size() - 3)); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { decode_adapter(bytes.substr(0, 6)); }), ErrorCode::kTruncated);
  auto magic = bytes;
  magic[1] = 'Y';
  EXPECT_EQ(code_of([&] { decode_adapter(magic); }), ErrorCode::kBadMagic);
  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(code_of([&] { decode_adapter(version); }), ErrorCode::kBadVersion);
  EXPECT_EQ(code_of([&] { decode_adapter(bytes + "z"); }), ErrorCode::kCorrupt);
  auto header = bytes;
  header[12] = '!';  // first byte of the JSON header
  EXPECT_EQ(code_of([&] { decode_adapter(header); }), ErrorCode::kCorrupt);
  testing::TempDir dir;
  EXPECT_EQ(code_of([&] { load_adapter(dir / "missing.hxad"); }), ErrorCode::kIo);
}

TrainConfig contrastive_cfg(Strategy s = Strategy::kHist) {
  TrainConfig c;
  c.objective = Objective::kContrastive;
  c.strategy = s;
  c.seed = 99;
  return c;
}

TEST(Batching, MixedPlanCoversBothSourcesOnce) {
  const auto h = ids(8, "h"), m = ids(8, "m");
  const auto cfg = contrastive_cfg(Strategy::kMixed);
  const auto plan = plan_batches(h, m, cfg);
  ASSERT_EQ(plan.batches.size(), 2u);
  std::multiset<std::string> seen;
  for (const auto& b : plan.batches) {
    EXPECT_EQ(b.size(), 8u);
    for (const auto& it : b) seen.insert(it.pair_id);
  }
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 16u);
  EXPECT_EQ(plan.count(Source::kHist), 8u);
  EXPECT_EQ(plan.count(Source::kModern), 8u);
  EXPECT_EQ(plan_batches(h, m, cfg), plan);
}

TEST(Batching, MixedBatchesActuallyMix) {
  const auto h = ids(200, "h"), m = ids(200, "m");
  const auto plan = plan_batches(h, m, contrastive_cfg(Strategy::kMixed));
  std::size_t both = 0;
  for (const auto& b : plan.batches) {
    std::set<Source> s;
    for (const auto& it : b) s.insert(it.source);
    both += s.size() == 2;
  }
  EXPECT_GT(both, plan.batches.size() / 2);
}

TEST(Batching, SingleStrategiesIgnoreTheOtherSource) {
  const auto h = ids(10, "h"), m = ids(6, "m");
  const auto hist = plan_batches(h, m, contrastive_cfg(Strategy::kHist));
  EXPECT_EQ(hist.count(Source::kHist), 10u);
  EXPECT_EQ(hist.count(Source::kModern), 0u);
  const auto modern = plan_batches(h, m, contrastive_cfg(Strategy::kModern));
  EXPECT_EQ(modern.count(Source::kModern), 6u);
  EXPECT_EQ(modern.count(Source::kHist), 0u);
  EXPECT_THROW(plan_batches(h, {}, contrastive_cfg(Strategy::kModern)), Error);
  EXPECT_THROW(plan_batches({}, m, contrastive_cfg(Strategy::kHist)), Error);
}

TEST(Batching, EpochsShuffleDifferently) {
  const auto h = ids(40, "h");
  const auto cfg = contrastive_cfg();
  EXPECT_NE(plan_batches(h, {}, cfg, 0), plan_batches(h, {}, cfg, 1));
  auto other = cfg;
  other.seed = 100;
  EXPECT_NE(plan_batches(h, {}, cfg, 0), plan_batches(h, {}, other, 0));
}

TEST(Batching, NoSingletonTailForContrastive) {
  const auto h = ids(17, "h");
  const auto plan = plan_batches(h, {}, contrastive_cfg());
  ASSERT_EQ(plan.batches.size(), 2u);
  EXPECT_EQ(plan.batches.back().size(), 9u);
  auto distill = contrastive_cfg();
  distill.objective = Objective::kDistill;
  EXPECT_EQ(plan_batches(h, {}, distill).batches.back().size(), 1u);
}

TEST(Batching, MixedImbalanceIsRejectedUnlessRepeated) {
  const auto h = ids(20, "h"), m = ids(40, "m");
  auto cfg = contrastive_cfg(Strategy::kMixed);
  EXPECT_THROW(plan_batches(h, m, cfg), Error);
  cfg.hist_repeat = 2;
  const auto plan = plan_batches(h, m, cfg);
  EXPECT_EQ(plan.count(Source::kHist), 40u);
  EXPECT_EQ(plan.count(Source::kModern), 40u);
}

EmbeddingMatrix scaled(const EmbeddingMatrix& m, float f) {
  std::vector<float> d(m.data().begin(), m.data().end());
  for (auto& x : d) x *= f;
  return EmbeddingMatrix(m.dim(), m.ids(), d);
}

TEST(Trainer, ZeroLearningRateKeepsIdentity) {
  const auto task = testing::make_rotation_task(40, 8, 0.01, 1);
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  const auto r = train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg);
  const auto id = AdapterModel::identity(8);
  EXPECT_EQ(r.model.W, id.W);
  EXPECT_EQ(r.model.b, id.b);
  EXPECT_EQ(r.loss_history.size(), 10u);
  EXPECT_EQ(r.epoch_ends, (std::vector<std::size_t>{5, 10}));
}

TEST(Trainer, SameSeedSameModel) {
  const auto task = testing::make_rotation_task(64, 8, 0.01, 2);
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 1e-2;
  cfg.epochs = 2;
  const auto src = to_matrix(task.source, "p"), tgt = to_matrix(task.target, "p");
  const auto a = train(src, tgt, cfg);
  const auto b = train(src, tgt, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.seed = 5;
  EXPECT_NE(train(src, tgt, cfg).model.W, a.model.W);
}

TEST(Trainer, RotationTaskLossFallsAndMetadataIsRecorded) {
  const auto task = testing::make_rotation_task(200, 16, 0.01, 3);
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 1e-2;
  cfg.epochs = 3;
  const auto r = train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg);
  const auto means = r.epoch_means();
  ASSERT_EQ(means.size(), 3u);
  EXPECT_LT(means[2], means[0]);
  EXPECT_EQ(r.model.hist_pairs, 200u);
  EXPECT_EQ(r.model.epochs, 3u);
  EXPECT_EQ(r.model.batch_size, 8u);
  EXPECT_EQ(r.model.apply_to, ApplyTo::kSource);
}

TEST(Trainer, TargetRowsAreMatchedById) {
  const auto task = testing::make_rotation_task(32, 4, 0.01, 4);
  const auto src = to_matrix(task.source, "p"), tgt = to_matrix(task.target, "p");
  std::vector<std::string> reversed(tgt.ids().rbegin(), tgt.ids().rend());
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 1e-2;
  EXPECT_EQ(train(src, tgt, cfg).model, train(src, tgt.gather(reversed), cfg).model);
  EXPECT_EQ(code_of([&] { train(src, to_matrix(task.target, "q"), cfg); }), ErrorCode::kNotFound);
}

TEST(Trainer, NonFiniteLossAbortsWithStep) {
  auto task = testing::make_rotation_task(16, 4, 0.01, 5);
  task.source[3][0] = std::numeric_limits<float>::quiet_NaN();
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 1e-2;
  try {
    train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos) << e.what();
  }
}

TEST(Trainer, SymmetricModeAppliesToBoth) {
  const auto task = testing::make_rotation_task(32, 4, 0.01, 6);
  auto cfg = contrastive_cfg();
  cfg.learning_rate = 1e-2;
  cfg.symmetric = true;
  const auto r = train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg);
  EXPECT_EQ(r.model.apply_to, ApplyTo::kBoth);
}

TEST(Trainer, MixedUsesBothDatasets) {
  const auto hist = testing::make_rotation_task(24, 4, 0.01, 7);
  const auto modern = testing::make_rotation_task(24, 4, 0.01, 8);
  auto cfg = contrastive_cfg(Strategy::kMixed);
  cfg.learning_rate = 1e-2;
  const PairedEmbeddings h{to_matrix(hist.source, "h"), to_matrix(hist.target, "h")};
  const PairedEmbeddings m{to_matrix(modern.source, "m"), to_matrix(modern.target, "m")};
  const auto r = train(h, m, cfg);
  EXPECT_EQ(r.model.hist_pairs, 24u);
  EXPECT_EQ(r.model.modern_pairs, 24u);
  EXPECT_EQ(r.model.strategy, Strategy::kMixed);
  EXPECT_EQ(r.loss_history.size(), 6u);
}

TEST(Trainer, DistillFromAlignedStartIsNearZero) {
  const auto task = testing::make_rotation_task(32, 4, 0.0, 9);
  const auto tgt = to_matrix(task.target, "p");
  auto cfg = contrastive_cfg();
  cfg.objective = Objective::kDistill;
  cfg.learning_rate = 1e-3;
  const auto r = train(tgt, tgt, cfg);
  EXPECT_EQ(r.loss_history.front(), 0.0);
  EXPECT_EQ(r.model.epochs, 5u);
}

TEST(Trainer, BidirectionalWithoutSecondTermIsPlainDistill) {
  const auto task = testing::make_rotation_task(40, 6, 0.01, 10);
  const auto src = to_matrix(task.source, "p"), tgt = to_matrix(task.target, "p");
  const auto teacher = scaled(tgt, 1.5f);
  auto cfg = contrastive_cfg();
  cfg.objective = Objective::kDistill;
  cfg.learning_rate = 1e-2;
  cfg.second_term = false;
  const auto bi = distill_bidirectional(src, tgt, teacher, cfg);
  const auto plain = train(src, teacher, cfg);
  EXPECT_EQ(bi.model.W, plain.model.W);
  EXPECT_EQ(bi.model.b, plain.model.b);
  EXPECT_EQ(bi.loss_history, plain.loss_history);
  EXPECT_EQ(bi.model.apply_to, ApplyTo::kSource);

  cfg.second_term = true;
  const auto both = distill_bidirectional(src, tgt, teacher, cfg);
  EXPECT_EQ(both.model.apply_to, ApplyTo::kBoth);
  EXPECT_NE(both.model.W, plain.model.W);
}

TEST(Trainer, ValidatesConfig) {
  const auto task = testing::make_rotation_task(8, 4, 0.01, 11);
  auto cfg = contrastive_cfg();
  cfg.batch_size = 1;
  EXPECT_THROW(train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg), Error);
  cfg = contrastive_cfg();
  cfg.learning_rate = -1;
  EXPECT_THROW(train(to_matrix(task.source, "p"), to_matrix(task.target, "p"), cfg), Error);
}

}  // namespace
}  // namespace histkit::adapt

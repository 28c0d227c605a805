#include <gtest/gtest.h>

#include <fstream>

#include "nnipls/errors.hpp"
#include "nnipls/kv_config.hpp"
#include "test_support.hpp"

namespace nnipls {
namespace {

TEST(KvConfig, ParsesCommentsAndOverrides) {
  auto kv = KvConfig::parse("# header\ntrain.lr0 = 0.005  # inline\n\nseed=3\ntrain.lr0 = 0.002\n");
  EXPECT_EQ(*kv.get_double("train.lr0"), 0.002);
  EXPECT_EQ(*kv.get_uint("seed"), 3u);
  kv.set("seed", "9");
  EXPECT_EQ(kv.uint_or("seed", 0), 9u);
  EXPECT_FALSE(kv.has("train.amsgrad"));
  EXPECT_TRUE(kv.bool_or("train.amsgrad", true));
}

TEST(KvConfig, TypedAccessorsRejectGarbage) {
  const auto kv = KvConfig::parse("a = x1\nb = -3\nc = maybe\nd = 1, 2.5 ,4\ne = 25,125\n");
  EXPECT_THROW(kv.get_double("a"), ConfigError);
  EXPECT_THROW(kv.get_uint("b"), ConfigError);
  EXPECT_THROW(kv.get_bool("c"), ConfigError);
  EXPECT_EQ(*kv.get_doubles("d"), (std::vector<double>{1, 2.5, 4}));
  EXPECT_EQ(*kv.get_sizes("e"), (std::vector<std::size_t>{25, 125}));
  EXPECT_THROW(KvConfig::parse("no equals sign"), ConfigError);
  EXPECT_THROW(KvConfig::parse(" = 3"), ConfigError);
}

TEST(KvConfig, UnknownKeysReported) {
  const auto kv = KvConfig::parse("train.lr0 = 0.1\ntrain.bogus = 1\n");
  try {
    kv.check_known(train_config_keys());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.bogus"), std::string::npos);
  }
}

TEST(KvConfig, FromFile) {
  const auto dir = testing::scratch_dir("kv");
  std::ofstream(dir / "run.cfg") << "md.temperature = 900\nmd.bond_list = 0-1,1-2\nmd.tau = inf\n";
  const auto md = md_config_from(KvConfig::from_file((dir / "run.cfg").string()));
  EXPECT_EQ(md.temperature, 900.0);
  EXPECT_EQ(md.bond_list, (std::vector<BondPair>{{0, 1}, {1, 2}}));
  EXPECT_FALSE(md.thermostat_enabled());
  EXPECT_THROW(KvConfig::from_file((dir / "missing.cfg").string()), IoError);
}

TEST(WeightScheduleText, RoundTrip) {
  const auto s = parse_weight_schedule("0:1:10,100:1000:1");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].epoch, 100u);
  EXPECT_EQ(s[1].w_energy, 1000.0);
  EXPECT_EQ(format_weight_schedule(s), "0:1:10,100:1000:1");
  EXPECT_THROW(parse_weight_schedule("0:1"), ConfigError);
}

TEST(TrainConfigFrom, ReadsEveryKey) {
  const auto kv = KvConfig::parse(
      "train.max_epochs = 7\ntrain.batch_size = 2\ntrain.lr0 = 0.003\ntrain.amsgrad = true\n"
      "train.ema_decay = 0.99\ntrain.plateau.patience = 4\ntrain.plateau.factor = 0.25\n"
      "train.weight_schedule = 0:1:10,5:1000:1\ntrain.swa_tail = 3\nseed = 12\nthreads = 2\n");
  EXPECT_NO_THROW(kv.check_known([] {
    auto k = train_config_keys();
    k.insert("seed");
    k.insert("threads");
    return k;
  }()));
  const auto c = train_config_from(kv);
  EXPECT_EQ(c.max_epochs, 7u);
  EXPECT_EQ(c.batch_size, 2u);
  EXPECT_EQ(c.lr0, 0.003);
  EXPECT_TRUE(c.amsgrad);
  EXPECT_EQ(*c.ema_decay, 0.99);
  EXPECT_EQ(c.plateau.patience, 4u);
  EXPECT_EQ(c.plateau.factor, 0.25);
  EXPECT_EQ(c.weight_schedule.size(), 2u);
  EXPECT_EQ(*c.swa_tail, 3u);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.threads, 2u);
  EXPECT_THROW(train_config_from(KvConfig::parse("train.plateau.factor = 2")), ConfigError);
}

TEST(TrainConfigFrom, DefaultsMatchDocumentedValues) {
  const auto c = train_config_from(KvConfig{});
  EXPECT_EQ(c.plateau.patience, 50u);
  EXPECT_EQ(c.plateau.factor, 0.5);
  EXPECT_EQ(c.weight_schedule[0].w_force, 1000.0);
  const auto md = md_config_from(KvConfig{});
  EXPECT_EQ(md.temperature, 1600.0);
  EXPECT_EQ(md.tau, 250.0);
  EXPECT_EQ(md.n_trajectories, 30u);
  EXPECT_EQ(md.failure_bond_length, 2.0);
  EXPECT_EQ(md.total_time, 6.0);
}

}  // namespace
}  // namespace nnipls

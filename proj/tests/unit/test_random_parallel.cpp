#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <vector>

#include "nnipls/parallel.hpp"
#include "nnipls/random.hpp"

namespace nnipls {
namespace {

TEST(Substreams, DeterministicAndDistinct) {
  EXPECT_EQ(substream_seed(7, "noise", 0), substream_seed(7, "noise", 0));
  std::set<std::uint64_t> seen;
  for (const char* name : {"noise", "landscape.direction", "md.velocities"})
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(substream_seed(7, name, i));
  EXPECT_EQ(seen.size(), 150u);
  EXPECT_NE(substream_seed(7, "noise"), substream_seed(8, "noise"));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {0u, 1u, 3u, 16u}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(20, 4,
                            [](std::size_t i) {
                              if (i == 13) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(ParallelFor, EmptyRangeIsNoop) {
  int calls = 0;
  parallel_for(0, 4, [&](std::size_t) { ++calls; });
  EXPECT_EQ(calls, 0);
}

}  // namespace
}  // namespace nnipls
